#include <doctest.h>

#include <cmath>

#include "convsim/errors.hpp"
#include "convsim/preference.hpp"
#include "convsim/rng.hpp"

using namespace convsim;

namespace {

const Semantics kFitted{0.87, 0.62};
const Theta kR1 = Theta::constant(10.0, 20.25, 9.23, 0.5, kFitted);
const Theta kPreferU = Theta::constant(10.0, 6.17, 10.15, 0.5, kFitted);
const Theta kPreferH = Theta::constant(10.0, 21.01, 3.09, 0.5, kFitted);

// Hand-written per-kind utilities averaged over the grid (8 cells cost 0.7,
// the middle 0.6), for a Builder that knows the grid words.
std::array<double, 3> hand_utilities(double bi, double bu, double bh, double xu, double xh) {
    const double lo = std::log(xu / (xu + 8 * (1 - xu)));
    const double red = std::log(xu * xh / (xu * xh + 8 * (1 - xu) * (1 - xh)));
    const double comp = std::log(xh / (xh + 8 * (1 - xh)));
    const double cu = (8 * 0.7 + 0.6) / 9.0;
    return {bi * red - bu * cu - bh * 0.6, bi * lo - bu * cu, bi * comp - bu * 0.1 - bh * 0.6};
}

ModalityDistribution hand_softmax(const std::array<double, 3>& u) {
    const double m = std::max({u[0], u[1], u[2]});
    const double a = std::exp(u[0] - m), b = std::exp(u[1] - m), c = std::exp(u[2] - m);
    const double z = a + b + c;
    return {a / z, b / z, c / z};
}

ModalityDistribution random_distribution(Rng& rng) {
    std::array<double, 3> w{};
    for (double& x : w) x = rng.below(5) == 0 ? 0.0 : -std::log(1.0 - rng.uniform());
    w[rng.below(3)] += 1e-3;
    return ModalityDistribution::from_array(w).normalized();
}

}  // namespace

TEST_CASE("predicted distribution examples") {
    const auto flat = predicted_modality_distribution(Theta::constant(0, 0, 0, 0.5, kFitted));
    CHECK(flat.p_r == doctest::Approx(1.0 / 3.0));
    CHECK(flat.p_u == doctest::Approx(1.0 / 3.0));
    CHECK(flat.p_c == doctest::Approx(1.0 / 3.0));

    const auto u = averaged_position_utilities(kR1, 1);
    const auto want = hand_utilities(10.0, 20.25, 9.23, 0.87, 0.62);
    for (int k = 0; k < 3; ++k) CHECK(u[k] == doctest::Approx(want[k]).epsilon(1e-12));

    const auto p = predicted_modality_distribution(kR1);
    const auto q = hand_softmax(want);
    CHECK(p.p_u == doctest::Approx(q.p_u).epsilon(1e-12));
    CHECK(p.p_u == doctest::Approx(0.93).epsilon(0.01));
    CHECK(p.p_u > p.p_r);
    CHECK(p.p_u > p.p_c);
    CHECK_NOTHROW(p.validate());

    const auto huge = predicted_modality_distribution(Theta::constant(10.0, 20.25, 1000.0, 0.5, kFitted));
    CHECK(huge.p_u == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("the utility hook replaces the per-kind utilities") {
    const KindUtilityFn fixed = [](const Theta&, int) { return std::array<double, 3>{0.0, std::log(2.0), 0.0}; };
    const auto p = predicted_modality_distribution(kR1, 1, fixed);
    CHECK(p.p_u == doctest::Approx(0.5));
    CHECK(p.p_r == doctest::Approx(0.25));
}

TEST_CASE("cross-entropy examples") {
    const ModalityDistribution half{0.5, 0.5, 0.0};
    CHECK(cross_entropy(half, half) == doctest::Approx(std::log(2.0)).epsilon(1e-12));

    const auto fig = ModalityDistribution{0.81, 0.12, 0.06}.normalized();
    CHECK(fig.p_r == doctest::Approx(0.8182).epsilon(1e-4));
    CHECK(entropy(fig) == doctest::Approx(0.590).epsilon(2e-3));

    const auto pred = predicted_modality_distribution(kR1);
    const ModalityDistribution one_hot{0.0, 1.0, 0.0};
    CHECK(cross_entropy(one_hot, pred) == doctest::Approx(-std::log(pred.p_u)).epsilon(1e-12));

    // Zero predictions are floored rather than producing infinity.
    CHECK(cross_entropy(ModalityDistribution{1, 0, 0}, ModalityDistribution{0, 1, 0}) ==
          doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("Gibbs inequality on random distributions") {
    Rng rng(12);
    for (int trial = 0; trial < 2000; ++trial) {
        const auto p = random_distribution(rng);
        const auto q = random_distribution(rng);
        const double hp = entropy(p);
        CHECK(hp >= 0.0);
        CHECK(hp <= std::log(3.0) + 1e-12);
        CHECK(cross_entropy(p, q) >= hp - 1e-12);
    }
}

TEST_CASE("distribution validation") {
    CHECK_THROWS_AS(ModalityDistribution({0.5, 0.5, 0.5}).validate(), ValidationError);
    CHECK_THROWS_AS(ModalityDistribution({-0.1, 0.6, 0.5}).validate(), ValidationError);
    CHECK_THROWS_AS(ModalityDistribution({0, 0, 0}).normalized(), ValidationError);
    CHECK(ModalityDistribution{1, 1, 2}.normalized().p_c == doctest::Approx(0.5));
    CHECK(ModalityDistribution{}[MessageKind::Complementary] == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("predictions are normalized, smooth and monotone in the gesture weight") {
    Rng rng(9);
    for (int trial = 0; trial < 300; ++trial) {
        const double bi = rng.uniform(0.0, 20.0), bu = rng.uniform(0.0, 40.0), bh = rng.uniform(0.0, 40.0);
        const Semantics sem{rng.uniform(0.5, 1.0), rng.uniform(0.5, 1.0)};
        const auto p = predicted_modality_distribution(Theta::constant(bi, bu, bh, 0.5, sem));
        CHECK(std::abs(p.sum() - 1.0) < 1e-9);

        const double h = 1e-6;
        for (int which = 0; which < 3; ++which) {
            Theta a = Theta::constant(bi, bu, bh, 0.5, sem), b = a;
            const double d = which == 0 ? h : 0.0, e = which == 1 ? h : 0.0, f = which == 2 ? h : 0.0;
            b = Theta::constant(bi + d, bu + e, bh + f, 0.5, sem);
            const auto pa = predicted_modality_distribution(a), pb = predicted_modality_distribution(b);
            for (int k = 0; k < 3; ++k)
                CHECK(std::abs(pa.to_array()[k] - pb.to_array()[k]) < 10 * h * std::max({1.0, bi, bu, bh}));
        }

        // One more unit of gesture weight costs each gesture-bearing kind exactly
        // its gesture cost; probabilities can saturate, so compare utilities too.
        const Theta heavier = Theta::constant(bi, bu, bh + 1.0, 0.5, sem);
        const auto u0 = averaged_position_utilities(Theta::constant(bi, bu, bh, 0.5, sem), 1);
        const auto u1 = averaged_position_utilities(heavier, 1);
        CHECK(u1[0] - u0[0] == doctest::Approx(-0.6).epsilon(1e-9));
        CHECK(u1[1] == u0[1]);
        CHECK(u1[2] - u0[2] == doctest::Approx(-0.6).epsilon(1e-9));
        const auto more = predicted_modality_distribution(heavier);
        CHECK(more.p_r <= p.p_r * (1 + 1e-12));
        CHECK(more.p_c <= p.p_c * (1 + 1e-12));
        CHECK(more.p_u >= p.p_u * (1 - 1e-12));
        if (p.p_u < 0.5) CHECK(more.p_u > p.p_u);
    }
}

TEST_CASE("interpolation between fitted endpoints") {
    const Theta t = interpolate_theta(kR1, kPreferU);
    CHECK(t.beta_u_at(1) == doctest::Approx(20.25));
    CHECK(t.beta_u_at(2) == doctest::Approx(20.25 + (6.17 - 20.25) / 3.0));
    CHECK(t.beta_u_at(4) == doctest::Approx(6.17));
    CHECK(t.beta_h_at(3) == doctest::Approx(9.23 + 2.0 * (10.15 - 9.23) / 3.0));
    CHECK(t.beta_i == 10.0);
    CHECK(t.sem.x_u == 0.87);
}

TEST_CASE("trajectories move in the fitted direction") {
    const auto u = simulate_modality_preferences(kR1, kPreferU, 200, 1);
    const auto h = simulate_modality_preferences(kR1, kPreferH, 200, 1);
    CHECK(u.n_runs == 200);
    CHECK(u.messages_per_repetition == 9);
    CHECK(h.mean[3].p_c > h.mean[0].p_c);
    for (const auto& traj : {u, h})
        for (const auto& m : traj.mean) CHECK(std::abs(m.sum() - 1.0) < 1e-9);

    // The Prefer-U endpoint raises the expected language-only share only slightly.
    const double du = predicted_modality_distribution(interpolate_theta(kR1, kPreferU), 4).p_u -
                      predicted_modality_distribution(kR1, 1).p_u;
    CHECK(du > 0.0);
    CHECK(du < 0.1);
}

TEST_CASE("constant parameters give flat expected trajectories") {
    const Theta s = interpolate_theta(kR1, kR1);
    const auto p1 = predicted_modality_distribution(s, 1);
    for (int r = 2; r <= 4; ++r) CHECK(predicted_modality_distribution(s, r).p_u == p1.p_u);

    const auto traj = simulate_modality_preferences(kR1, kR1, 2000, 3);
    for (int r = 0; r < 4; ++r) {
        CHECK(traj.mean[r].p_u == doctest::Approx(p1.p_u).epsilon(0.01));
        CHECK(traj.sd[r].p_u > 0.0);
    }
}

TEST_CASE("trajectory simulation is reproducible and thread independent") {
    PreferenceOptions one, four;
    four.threads = 4;
    const auto a = simulate_modality_preferences(kR1, kPreferH, 50, 77, one);
    const auto b = simulate_modality_preferences(kR1, kPreferH, 50, 77, four);
    for (int r = 0; r < 4; ++r) {
        CHECK(a.mean[r].to_array() == b.mean[r].to_array());
        CHECK(a.sd[r].to_array() == b.sd[r].to_array());
    }
    CHECK_THROWS_AS(simulate_modality_preferences(kR1, kR1, 0, 1), ValidationError);
    PreferenceOptions none;
    none.messages_per_repetition = 0;
    CHECK_THROWS_AS(simulate_modality_preferences(kR1, kR1, 5, 1, none), ValidationError);
}

TEST_CASE("fit bounds and parameter vectors") {
    const Bounds b = modality_fit_bounds();
    CHECK(b.size() == 5);
    CHECK(b.ranges[kBetaI].fixed());
    CHECK(b.ranges[kBetaU].upper == 40.0);
    CHECK(b.ranges[kXh].lower == 0.5);
    const Bounds f = modality_fit_bounds_fixed_semantics(0.9, 0.7);
    CHECK(f.free_count() == 2);
    const std::array<double, 5> x{10.0, 1.0, 2.0, 0.9, 0.7};
    const Theta t = theta_from_params(x);
    CHECK(t.beta_h_at(4) == 2.0);
    CHECK(t.sem.x_h == 0.7);
    const std::array<double, 4> short_x{};
    CHECK_THROWS_AS(theta_from_params(short_x), ValidationError);
}

TEST_CASE("fitting a synthetic target approaches its entropy") {
    const std::array<double, 5> truth{10.0, 12.0, 4.0, 0.8, 0.7};
    const FitTarget target{"synthetic", predicted_modality_distribution(theta_from_params(truth))};
    FitOptions opt;
    opt.seed = 5;
    const FitResult fit = fit_modality(target, modality_fit_bounds(), opt);
    CHECK(fit.label == "synthetic");
    CHECK(fit.record.evaluations.size() <= 200);
    CHECK(fit.best_loss >= fit.target_entropy - 1e-12);
    CHECK(fit.best_loss - fit.target_entropy < 0.02);
    CHECK(modality_fit_bounds().contains(fit.record.best_point));
    CHECK_THROWS_AS(fit_modality({"bad", {0.5, 0.5, 0.5}}, modality_fit_bounds()), ValidationError);
}
