#pragma once

#include "frontcont/bore.hpp"
#include "frontcont/grid.hpp"
#include "frontcont/robin.hpp"

#include <Eigen/Dense>

namespace frontcont {

enum class Side { upstream, downstream };

/// Transversal second-order operator on one cross-section.
///
/// Row r of `A` is the discrete equation at slot r. Interior rows carry the
/// eigenvalue (mask 1); Dirichlet, oblique, jump and continuity rows do not
/// (mask 0). `outward` is +1 or -1 on oblique/jump rows (sign that turns the
/// row into an outward conormal derivative plus zeroth-order term) and 0 elsewhere.
struct Operator1D {
    Layout layout = Layout::single;
    int ny = 0;
    double dy = 0.0;
    Eigen::MatrixXd A;
    Eigen::VectorXi mask;
    Eigen::VectorXi outward;
    Eigen::VectorXi dirichlet;  ///< 1 on rows w = 0
    Eigen::VectorXd coordinate;

    int size() const { return static_cast<int>(A.rows()); }
};

struct EigenReport {
    double sigma0 = 0.0;
    Eigen::VectorXd eigenfunction;  ///< full column, max-normalized to 1
    bool positivity_ok = false;
    bool dominance_ok = false;
    int iterations = 0;
    double residual = 0.0;  ///< max |A w - sigma0 mask w|
    double scale = 0.0;     ///< max |A_ij| of the condensed operator
};

/// w'' on (0,1), w(0) = 0, w'(1) + (g_z - 1) w(1) = 0.
Operator1D robin_operator(int ny, double g_z);

/// (w_p / H_i^3)_p in each layer, walls w = 0, continuity at p = 0 and the jump row
/// [[rho h^2 w_p / H^3]] - ([[rho]]/F^2) w, with H_i = h_i + U_p in layer i.
Operator1D bore_operator(int ny, const BoreParams& p, double Up_lower, double Up_upper);

/// Operator at the requested end of a computed state. Throws EigenError when the
/// far field is not settled within tail_tol.
Operator1D transversal_operator(const RobinState& s, const RobinNonlinearity& nl, Side side,
                                double tail_tol = 1e-6);
Operator1D transversal_operator(const BoreState& s, Side side, double tail_tol = 1e-6);

struct EigenOptions {
    int max_iters = 200000;
    double refine_tol = 1e-12;
};

/// Rightmost real eigenvalue with a positive eigenfunction, by shift-invert power
/// iteration from the all-ones vector followed by a shifted inverse-iteration refinement.
EigenReport principal_eigenvalue(const Operator1D& op, const EigenOptions& opt = {});

/// Principal eigenvalue of the continuous Robin operator by scalar bisection.
double robin_sigma_oracle(double g_z);

/// True when w > 0 off Dirichlet nodes, interior rows give A w <= 0 and oblique/jump
/// rows give outward * (A w) >= 0, with at least one strict inequality. `tol` is
/// relative to max |A_ij| max |w|.
bool is_strict_supersolution(const Operator1D& op, const Eigen::VectorXd& w, double tol = 1e-12);

struct SpectralMargin {
    double sigma_minus = 0.0;
    double sigma_plus = 0.0;
    bool positivity_ok = false;
    double max() const { return sigma_minus > sigma_plus ? sigma_minus : sigma_plus; }
};

SpectralMargin spectral_margin(const RobinState& s, const RobinNonlinearity& nl, double tail_tol = 1e-6);
SpectralMargin spectral_margin(const BoreState& s, double tail_tol = 1e-6);

}  // namespace frontcont
