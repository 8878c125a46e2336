#pragma once

#include "frontcont/grid.hpp"
#include "frontcont/robin.hpp"

#include <vector>

namespace frontcont {

/// Two-layer stratification; lambda is the upstream lower-layer thickness.
struct BoreParams {
    double rho1 = 1.0;  ///< lower (heavier) layer
    double rho2 = 0.25;
    double lambda = 0.5;

    double h1() const { return lambda; }
    double h2() const { return 1.0 - lambda; }
    double F2() const;
};

/// Throws ConfigError unless 0 < rho2 < rho1 and 0 < lambda < 1.
void validate(const BoreParams& p);

struct BoreState {
    Field u;  ///< streamline displacement on a two-layer grid
    BoreParams params;
};

double froude_squared(double rho1, double rho2);
double lambda_star(double rho1, double rho2);
double kappa1_bore(double rho1, double rho2);

/// U+(p) = (lambda* - lambda)(1 - |p|) sampled on the column slots.
std::vector<double> conjugate_state_bore(double lambda, const BoreParams& p, const Grid& g);

/// Node-wise residual; every node carries its own equation.
///   p = -1, p = 1:      u
///   x = -L:             u
///   x = +L:             u - U+(p)
///   interior:           rho_i [ (-(1+u_q^2)/(2 H^2))_p + (u_q/H)_q ],  H = h_i + u_p
///   lower trace (p=0):  -1/2 [[rho h^2 (1+u_q^2)/H^2]] - [[rho]]/F^2 u + [[rho]]/2
///   upper trace (p=0):  u_upper - u_lower
/// Interior rows use face fluxes; the interface row uses one-sided u_p.
Field bore_residual(const BoreState& s);

Linearization bore_jacobian(const BoreState& s);

double flow_force_bore(const BoreState& s, int x_index);
std::vector<double> flow_force_bore_profile(const BoreState& s);

struct BoreDiagnostics {
    double ellipticity_margin = 0.0;    ///< min(h + u_p)
    double stagnation_indicator = 0.0;  ///< min over the interface of h/(h + u_p)
    double interface_max_slope = 0.0;   ///< max over the interface of |u_q|
    double wall_gap = 0.0;              ///< min distance from the interface to either wall
    double velocity_bound = 0.0;        ///< max of |u_q/(h + u_p)| and 1/(h + u_p)
};

BoreDiagnostics bore_diagnostics(const BoreState& s);

/// Minimum of h + u_p over nodes (one-sided at walls and interface) and its location.
struct EllipticityReport {
    double min = 0.0;
    int i = 0;
    int k = 0;
};
EllipticityReport bore_ellipticity(const BoreState& s);

/// u = -(eps/2)(1 + tanh(kappa1 |eps| (q + shift)))(1 - |p|), lambda = lambda* + eps.
BoreState seed_bore(double eps, const Grid& g, double rho1, double rho2, double shift = 0.0,
                    double eps_seed_max = 0.05);

}  // namespace frontcont
