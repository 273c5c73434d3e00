#pragma once

// Bounded derivative-free minimization over a small parameter box.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace convsim {

struct ParamRange {
    std::string name;
    double lower = 0.0;
    double upper = 1.0;

    bool fixed() const { return lower == upper; }
};

// A box; ranges with lower == upper are held fixed and not searched.
struct Bounds {
    std::vector<ParamRange> ranges;

    std::size_t size() const { return ranges.size(); }
    std::size_t free_count() const;
    bool contains(std::span<const double> point) const;
    void validate() const;  // ValidationError unless lower <= upper and finite
};

struct Evaluation {
    std::vector<double> point;
    double loss = 0.0;
};

struct OptRecord {
    std::vector<double> best_point;
    double best_loss = 0.0;
    std::vector<Evaluation> evaluations;  // in evaluation order
    std::uint64_t seed = 0;

    // Best loss seen after each evaluation.
    std::vector<double> best_so_far() const;
};

using LossFn = std::function<double(std::span<const double>)>;

struct MinimizeOptions {
    int n_init = 40;   // random initial points
    int n_iter = 200;  // total loss evaluations, including the initial ones
    std::uint64_t seed = 0;
    int threads = 1;   // initial batch only; loss must be thread-safe when > 1
};

class Minimizer {
public:
    virtual ~Minimizer() = default;
    virtual OptRecord minimize(const LossFn& loss, const Bounds& bounds, const MinimizeOptions& options) const = 0;
};

// Latin-hypercube initial design, then Nelder-Mead in the unit-scaled box with
// trial points clamped to the bounds. When a simplex collapses the search
// restarts around the next-best initial point. Repeated points (to 1e-9) are
// served from a cache and not counted against the budget.
class LatinHypercubeNelderMead final : public Minimizer {
public:
    OptRecord minimize(const LossFn& loss, const Bounds& bounds, const MinimizeOptions& options) const override;
};

// Default backend. Throws NonFiniteLoss if the loss is not finite at an
// evaluated point, ValidationError on bad bounds or budgets.
OptRecord minimize(const LossFn& loss, const Bounds& bounds, int n_init, int n_iter, std::uint64_t seed,
                   int threads = 1);

}  // namespace convsim
