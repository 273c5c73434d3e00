#include "convsim/preference.hpp"

#include <cmath>

#include <fmt/format.h>

#include "convsim/errors.hpp"
#include "convsim/parallel.hpp"
#include "convsim/rng.hpp"

namespace convsim {

namespace {

constexpr double kProbabilityFloor = 1e-12;

ModalityDistribution sample_sd(const std::vector<ModalityDistribution>& xs, const ModalityDistribution& mean) {
    if (xs.size() < 2) return {0.0, 0.0, 0.0};
    std::array<double, 3> ss{};
    const auto m = mean.to_array();
    for (const auto& x : xs) {
        const auto a = x.to_array();
        for (int k = 0; k < 3; ++k) ss[k] += (a[k] - m[k]) * (a[k] - m[k]);
    }
    const double denom = static_cast<double>(xs.size() - 1);
    return {std::sqrt(ss[0] / denom), std::sqrt(ss[1] / denom), std::sqrt(ss[2] / denom)};
}

}  // namespace

double ModalityDistribution::operator[](MessageKind k) const {
    switch (k) {
        case MessageKind::Redundant: return p_r;
        case MessageKind::LanguageOnly: return p_u;
        case MessageKind::Complementary: return p_c;
    }
    return 0.0;
}

void ModalityDistribution::validate() const {
    for (double p : to_array())
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("modality proportions must be finite and >= 0");
    if (std::abs(sum() - 1.0) > 1e-9)
        throw ValidationError(fmt::format("modality proportions sum to {}, not 1", sum()));
}

ModalityDistribution ModalityDistribution::normalized() const {
    for (double p : to_array())
        if (!(p >= 0.0) || !std::isfinite(p)) throw ValidationError("modality proportions must be finite and >= 0");
    const double s = sum();
    if (!(s > 0.0)) throw ValidationError("modality proportions are all zero");
    return {p_r / s, p_u / s, p_c / s};
}

std::array<double, 3> averaged_position_utilities(const Theta& theta, int r) {
    const Lexicon lex;
    const auto belief = LexiconBelief::point_mass(lex);
    std::array<double, 3> sum{};
    for (const Symbol& p : all_positions())
        for (std::size_t k = 0; k < kAllKinds.size(); ++k)
            sum[k] += submessage_utility(SubMessage::of_kind(kAllKinds[k], p, lex), theta, r, belief);
    for (double& s : sum) s /= static_cast<double>(kNumPositions);
    return sum;
}

ModalityDistribution predicted_modality_distribution(const Theta& theta, int r, const KindUtilityFn& utilities) {
    const auto u = utilities(theta, r);
    const auto p = softmax(u);
    return {p[0], p[1], p[2]};
}

double cross_entropy(const ModalityDistribution& observed, const ModalityDistribution& predicted) {
    const auto o = observed.to_array();
    const auto q = predicted.to_array();
    double h = 0.0;
    for (int k = 0; k < 3; ++k)
        if (o[k] > 0.0) h -= o[k] * std::log(std::max(q[k], kProbabilityFloor));
    return h;
}

Theta interpolate_theta(const Theta& r1, const Theta& r4) {
    Theta out = r1;
    for (int r = 1; r <= kRepetitions; ++r) {
        const double w = static_cast<double>(r - 1) / (kRepetitions - 1);
        const auto i = static_cast<std::size_t>(r - 1);
        out.beta_u[i] = (1.0 - w) * r1.beta_u_at(1) + w * r4.beta_u_at(kRepetitions);
        out.beta_h[i] = (1.0 - w) * r1.beta_h_at(1) + w * r4.beta_h_at(kRepetitions);
    }
    return out;
}

ModalityTrajectory simulate_modality_preferences(const Theta& theta_r1, const Theta& theta_r4, int n_runs,
                                                 std::uint64_t seed, const PreferenceOptions& options) {
    if (n_runs < 1) throw ValidationError("n_runs must be at least 1");
    if (options.messages_per_repetition < 1) throw ValidationError("messages_per_repetition must be at least 1");
    theta_r1.validate();
    theta_r4.validate();

    const Theta schedule = interpolate_theta(theta_r1, theta_r4);
    std::array<std::array<double, 3>, kRepetitions> predicted{};
    for (int r = 1; r <= kRepetitions; ++r)
        predicted[r - 1] = predicted_modality_distribution(schedule, r, options.utilities).to_array();

    // per_run[i][r] = proportions observed in run i, repetition r
    std::vector<std::array<ModalityDistribution, kRepetitions>> per_run(static_cast<std::size_t>(n_runs));
    parallel_for(per_run.size(), options.threads, [&](std::size_t i) {
        Rng rng = Rng::stream(seed, i);
        for (int r = 0; r < kRepetitions; ++r) {
            std::array<double, 3> counts{};
            for (int m = 0; m < options.messages_per_repetition; ++m) counts[rng.categorical(predicted[r])] += 1.0;
            for (double& c : counts) c /= options.messages_per_repetition;
            per_run[i][r] = ModalityDistribution::from_array(counts);
        }
    });

    ModalityTrajectory out;
    out.n_runs = n_runs;
    out.messages_per_repetition = options.messages_per_repetition;
    for (int r = 0; r < kRepetitions; ++r) {
        std::array<double, 3> sum{};
        std::vector<ModalityDistribution> xs;
        xs.reserve(per_run.size());
        for (const auto& run : per_run) {
            const auto a = run[r].to_array();
            for (int k = 0; k < 3; ++k) sum[k] += a[k];
            xs.push_back(run[r]);
        }
        for (double& s : sum) s /= n_runs;
        out.mean[r] = ModalityDistribution::from_array(sum);
        out.sd[r] = sample_sd(xs, out.mean[r]);
    }
    return out;
}

Bounds modality_fit_bounds() {
    return Bounds{{{"beta_i", 10.0, 10.0}, {"beta_u", 0.0, 40.0}, {"beta_h", 0.0, 40.0}, {"x_u", 0.5, 1.0},
                   {"x_h", 0.5, 1.0}}};
}

Bounds modality_fit_bounds_fixed_semantics(double x_u, double x_h, double beta_i) {
    auto b = modality_fit_bounds();
    b.ranges[kBetaI].lower = b.ranges[kBetaI].upper = beta_i;
    b.ranges[kXu].lower = b.ranges[kXu].upper = x_u;
    b.ranges[kXh].lower = b.ranges[kXh].upper = x_h;
    return b;
}

Theta theta_from_params(std::span<const double> params, double gamma) {
    if (params.size() != 5) throw ValidationError("fit parameter vector must have 5 entries");
    return Theta::constant(params[kBetaI], params[kBetaU], params[kBetaH], gamma, {params[kXu], params[kXh]});
}

FitResult fit_modality(const FitTarget& target, const Bounds& bounds, const FitOptions& options) {
    target.observed.validate();
    if (bounds.size() != 5) throw ValidationError("modality fit expects the 5-parameter box");
    const auto observed = target.observed;
    const auto& utilities = options.utilities;
    const double gamma = options.gamma;
    LossFn loss = [observed, utilities, gamma](std::span<const double> x) {
        return cross_entropy(observed, predicted_modality_distribution(theta_from_params(x, gamma), 1, utilities));
    };

    MinimizeOptions mo;
    mo.n_init = options.n_init;
    mo.n_iter = options.n_iter;
    mo.seed = options.seed;
    mo.threads = options.threads;

    FitResult out;
    out.label = target.label;
    out.record = LatinHypercubeNelderMead{}.minimize(loss, bounds, mo);
    out.best_loss = out.record.best_loss;
    out.theta = theta_from_params(out.record.best_point, gamma);
    out.target_entropy = entropy(observed);
    return out;
}

}  // namespace convsim
