#include "convsim/optim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>
#include <optional>

#include <fmt/format.h>

#include "convsim/errors.hpp"
#include "convsim/parallel.hpp"
#include "convsim/rng.hpp"

namespace convsim {

std::size_t Bounds::free_count() const {
    return static_cast<std::size_t>(std::count_if(ranges.begin(), ranges.end(), [](const auto& r) { return !r.fixed(); }));
}

bool Bounds::contains(std::span<const double> point) const {
    if (point.size() != ranges.size()) return false;
    for (std::size_t i = 0; i < point.size(); ++i)
        if (point[i] < ranges[i].lower || point[i] > ranges[i].upper) return false;
    return true;
}

void Bounds::validate() const {
    for (const auto& r : ranges)
        if (!std::isfinite(r.lower) || !std::isfinite(r.upper) || r.lower > r.upper)
            throw ValidationError(fmt::format("bad range for {}: [{}, {}]", r.name, r.lower, r.upper));
}

std::vector<double> OptRecord::best_so_far() const {
    std::vector<double> out;
    out.reserve(evaluations.size());
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : evaluations) {
        best = std::min(best, e.loss);
        out.push_back(best);
    }
    return out;
}

namespace {

constexpr double kCacheResolution = 1e-9;
constexpr double kInitialStep = 0.15;   // simplex edge in unit coordinates
constexpr double kCollapseSize = 1e-7;  // simplex diameter that triggers a restart
constexpr double kFlatLoss = 1e-12;
constexpr int kMaxCacheHitsInARow = 64;

// Loss evaluation in unit coordinates of the free dimensions, with caching
// and the evaluation budget.
class Evaluator {
public:
    Evaluator(const LossFn& loss, const Bounds& bounds, int budget, OptRecord& record)
        : loss_(loss), bounds_(bounds), budget_(budget), record_(record) {
        for (std::size_t i = 0; i < bounds.size(); ++i)
            if (!bounds.ranges[i].fixed()) free_.push_back(i);
    }

    std::size_t dims() const { return free_.size(); }
    bool exhausted() const { return static_cast<int>(record_.evaluations.size()) >= budget_; }
    int cache_hits_in_a_row() const { return hits_in_a_row_; }

    std::vector<double> to_point(std::span<const double> unit) const {
        std::vector<double> p(bounds_.size());
        for (std::size_t i = 0; i < bounds_.size(); ++i) p[i] = bounds_.ranges[i].lower;
        for (std::size_t k = 0; k < free_.size(); ++k) {
            const auto& r = bounds_.ranges[free_[k]];
            const double u = std::clamp(unit[k], 0.0, 1.0);
            p[free_[k]] = std::clamp(r.lower + u * (r.upper - r.lower), r.lower, r.upper);
        }
        return p;
    }

    // Loss at a unit-coordinate point, or nullopt when the budget is spent.
    std::optional<double> operator()(std::span<const double> unit) {
        auto point = to_point(unit);
        const auto key = cache_key(point);
        if (auto it = cache_.find(key); it != cache_.end()) {
            ++hits_in_a_row_;
            return it->second;
        }
        if (exhausted()) return std::nullopt;
        hits_in_a_row_ = 0;
        const double value = checked(point);
        record(std::move(point), key, value);
        return value;
    }

    // Evaluates a batch (possibly in parallel) and records it in order.
    std::vector<double> batch(const std::vector<std::vector<double>>& units, int threads) {
        std::vector<std::vector<double>> points;
        for (const auto& u : units) points.push_back(to_point(u));
        std::vector<double> values(points.size());
        parallel_for(points.size(), threads, [&](std::size_t i) { values[i] = checked(points[i]); });
        for (std::size_t i = 0; i < points.size(); ++i) {
            const auto key = cache_key(points[i]);
            if (cache_.count(key)) continue;
            record(std::move(points[i]), key, values[i]);
        }
        return values;
    }

private:
    using Key = std::vector<long long>;

    static Key cache_key(std::span<const double> point) {
        Key k(point.size());
        for (std::size_t i = 0; i < point.size(); ++i) k[i] = std::llround(point[i] / kCacheResolution);
        return k;
    }

    double checked(std::span<const double> point) const {
        const double v = loss_(point);
        if (!std::isfinite(v)) {
            std::string where;
            for (std::size_t i = 0; i < point.size(); ++i)
                where += fmt::format("{}{}={}", i ? ", " : "", bounds_.ranges[i].name, point[i]);
            throw NonFiniteLoss(fmt::format("loss is {} at ({})", v, where));
        }
        return v;
    }

    void record(std::vector<double> point, const Key& key, double value) {
        cache_.emplace(key, value);
        if (record_.evaluations.empty() || value < record_.best_loss) {
            record_.best_loss = value;
            record_.best_point = point;
        }
        record_.evaluations.push_back({std::move(point), value});
    }

    const LossFn& loss_;
    const Bounds& bounds_;
    int budget_;
    OptRecord& record_;
    std::vector<std::size_t> free_;
    std::map<Key, double> cache_;
    int hits_in_a_row_ = 0;
};

struct Vertex {
    std::vector<double> x;
    double f;
};

std::vector<double> clamp_unit(std::vector<double> x) {
    for (double& v : x) v = std::clamp(v, 0.0, 1.0);
    return x;
}

double diameter(const std::vector<Vertex>& simplex) {
    double d = 0.0;
    for (std::size_t i = 1; i < simplex.size(); ++i)
        for (std::size_t k = 0; k < simplex[i].x.size(); ++k) d = std::max(d, std::abs(simplex[i].x[k] - simplex[0].x[k]));
    return d;
}

// Runs Nelder-Mead from `start` until the simplex collapses or the budget is
// spent. Returns false if the budget ran out.
bool nelder_mead(Evaluator& eval, const std::vector<double>& start, double start_f) {
    const std::size_t n = eval.dims();
    std::vector<Vertex> simplex{{start, start_f}};
    for (std::size_t k = 0; k < n; ++k) {
        auto x = start;
        x[k] += (x[k] + kInitialStep <= 1.0) ? kInitialStep : -kInitialStep;
        auto f = eval(x);
        if (!f) return false;
        simplex.push_back({std::move(x), *f});
    }

    auto by_loss = [](const Vertex& a, const Vertex& b) { return a.f < b.f; };
    while (true) {
        std::stable_sort(simplex.begin(), simplex.end(), by_loss);
        if (diameter(simplex) < kCollapseSize ||
            (std::abs(simplex.back().f - simplex.front().f) < kFlatLoss && diameter(simplex) < 1e-4) ||
            eval.cache_hits_in_a_row() > kMaxCacheHitsInARow)
            return true;

        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i].x[k] / static_cast<double>(n);
        const Vertex& worst = simplex.back();
        auto along = [&](double t) {
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k) x[k] = centroid[k] + t * (worst.x[k] - centroid[k]);
            return clamp_unit(std::move(x));
        };

        auto xr = along(-1.0);
        auto fr = eval(xr);
        if (!fr) return false;
        if (*fr < simplex.front().f) {
            auto xe = along(-2.0);
            auto fe = eval(xe);
            if (!fe) return false;
            simplex.back() = *fe < *fr ? Vertex{std::move(xe), *fe} : Vertex{std::move(xr), *fr};
            continue;
        }
        if (*fr < simplex[n - 1].f) {
            simplex.back() = {std::move(xr), *fr};
            continue;
        }
        const bool outside = *fr < worst.f;
        auto xc = along(outside ? -0.5 : 0.5);
        auto fc = eval(xc);
        if (!fc) return false;
        if (*fc < std::min(*fr, worst.f)) {
            simplex.back() = {std::move(xc), *fc};
            continue;
        }
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            std::vector<double> x(n);
            for (std::size_t k = 0; k < n; ++k) x[k] = simplex[0].x[k] + 0.5 * (simplex[i].x[k] - simplex[0].x[k]);
            auto f = eval(x);
            if (!f) return false;
            simplex[i] = {std::move(x), *f};
        }
    }
}

}  // namespace

OptRecord LatinHypercubeNelderMead::minimize(const LossFn& loss, const Bounds& bounds,
                                             const MinimizeOptions& options) const {
    bounds.validate();
    if (options.n_init < 1) throw ValidationError("n_init must be at least 1");
    if (options.n_iter < options.n_init) throw ValidationError("n_iter must be at least n_init");

    OptRecord record;
    record.seed = options.seed;
    Evaluator eval(loss, bounds, options.n_iter, record);
    const std::size_t d = eval.dims();
    Rng rng(options.seed);

    // Latin hypercube: one point per stratum along every free axis.
    const auto n_init = static_cast<std::size_t>(options.n_init);
    std::vector<std::vector<double>> design(n_init, std::vector<double>(d));
    for (std::size_t k = 0; k < d; ++k) {
        std::vector<std::size_t> strata(n_init);
        std::iota(strata.begin(), strata.end(), 0);
        rng.shuffle(std::span<std::size_t>(strata));
        for (std::size_t i = 0; i < n_init; ++i)
            design[i][k] = (static_cast<double>(strata[i]) + rng.uniform()) / static_cast<double>(n_init);
    }
    const auto values = eval.batch(design, options.threads);
    if (d == 0) return record;

    std::vector<std::size_t> order(n_init);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    // Refine from the best initial point, then from the next ones in loss order.
    std::size_t proposals_guard = 0;
    for (std::size_t start = 0; !eval.exhausted(); start = (start + 1) % n_init) {
        if (!nelder_mead(eval, design[order[start]], values[order[start]])) break;
        if (++proposals_guard > 64 * static_cast<std::size_t>(options.n_iter)) break;
    }
    return record;
}

OptRecord minimize(const LossFn& loss, const Bounds& bounds, int n_init, int n_iter, std::uint64_t seed,
                   int threads) {
    MinimizeOptions opts;
    opts.n_init = n_init;
    opts.n_iter = n_iter;
    opts.seed = seed;
    opts.threads = threads;
    return LatinHypercubeNelderMead{}.minimize(loss, bounds, opts);
}

}  // namespace convsim
