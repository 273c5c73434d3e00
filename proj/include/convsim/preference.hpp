#pragma once

// Modality preferences for block-position instructions: predicted
// redundant / language-only / complementary proportions, their evolution over
// repetitions, and fitting parameters to observed proportions.

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "convsim/agents.hpp"
#include "convsim/optim.hpp"

namespace convsim {

// Proportions in the order (redundant, language-only, complementary).
struct ModalityDistribution {
    double p_r = 1.0 / 3.0;
    double p_u = 1.0 / 3.0;
    double p_c = 1.0 / 3.0;

    static ModalityDistribution from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }
    std::array<double, 3> to_array() const { return {p_r, p_u, p_c}; }
    double operator[](MessageKind k) const;

    double sum() const { return p_r + p_u + p_c; }
    // ValidationError unless non-negative and summing to 1 within 1e-9.
    void validate() const;
    // Rescaled to sum to 1; ValidationError on negative or all-zero entries.
    ModalityDistribution normalized() const;
};

struct FitTarget {
    std::string label;  // R1, R4_PreferU, R4_PreferH, or any user label
    ModalityDistribution observed;
};

// Utilities (U_r, U_u, U_c) of the three message kinds at repetition r.
using KindUtilityFn = std::function<std::array<double, 3>(const Theta&, int)>;

// Default hook: single-step block-position message utilities averaged over
// the nine grid positions.
std::array<double, 3> averaged_position_utilities(const Theta& theta, int repetition);

ModalityDistribution predicted_modality_distribution(const Theta& theta, int repetition = 1,
                                                     const KindUtilityFn& utilities = averaged_position_utilities);

// H(obs, pred) = -sum obs_k ln pred_k with pred floored at 1e-12.
double cross_entropy(const ModalityDistribution& observed, const ModalityDistribution& predicted);
inline double entropy(const ModalityDistribution& d) { return cross_entropy(d, d); }

// beta_u and beta_h move linearly from the R1 values to the R4 values over
// repetitions 1..4; everything else is taken from `r1`.
Theta interpolate_theta(const Theta& r1, const Theta& r4);

struct ModalityTrajectory {
    std::array<ModalityDistribution, kRepetitions> mean;
    std::array<ModalityDistribution, kRepetitions> sd;  // across runs, n - 1
    int n_runs = 0;
    int messages_per_repetition = 0;
};

struct PreferenceOptions {
    int messages_per_repetition = 9;  // block placements per repetition (3 towers x 3 blocks)
    int threads = 1;
    KindUtilityFn utilities = averaged_position_utilities;
};

// Each run samples `messages_per_repetition` kinds per repetition from the
// predicted distribution at that repetition; returns mean proportions.
ModalityTrajectory simulate_modality_preferences(const Theta& theta_r1, const Theta& theta_r4, int n_runs,
                                                 std::uint64_t seed, const PreferenceOptions& options = {});

// ---- fitting ------------------------------------------------------------------

// Parameter vector layout used by the fitter.
enum FitParam : std::size_t { kBetaI = 0, kBetaU = 1, kBetaH = 2, kXu = 3, kXh = 4 };

// beta_u, beta_h in [0, 40]; x_u, x_h in [0.5, 1]; beta_i fixed at 10.
Bounds modality_fit_bounds();
// Same box with x_u and x_h pinned (used for the R4 fits).
Bounds modality_fit_bounds_fixed_semantics(double x_u, double x_h, double beta_i = 10.0);

// Theta with constant betas built from a parameter vector in FitParam layout.
Theta theta_from_params(std::span<const double> params, double gamma = 0.5);

struct FitResult {
    std::string label;
    Theta theta;
    OptRecord record;
    double best_loss = 0.0;
    double target_entropy = 0.0;
};

struct FitOptions {
    int n_init = 40;
    int n_iter = 200;
    std::uint64_t seed = 0;
    int threads = 1;
    double gamma = 0.5;
    KindUtilityFn utilities = averaged_position_utilities;
};

// Minimizes cross-entropy between the target and the R1 prediction of theta.
FitResult fit_modality(const FitTarget& target, const Bounds& bounds, const FitOptions& options = {});

}  // namespace convsim
