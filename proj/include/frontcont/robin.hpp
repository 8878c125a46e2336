#pragma once

#include "frontcont/grid.hpp"

#include <Eigen/Sparse>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace frontcont {

/// Values of the boundary nonlinearity and its antiderivative at (z, lambda).
struct NonlinearityValues {
    double g = 0.0;
    double g_z = 0.0;
    double g_lambda = 0.0;
    double G = 0.0;
};

/// Reduced coefficients g_lm = d_z^l d_lambda^m g(0,0) / (l! m!).
struct ReducedCoefficients {
    double g12 = 0.0;
    double g21 = 0.0;
    double g30 = 0.0;
};

/// Boundary nonlinearity g(z, lambda) = G_z on the top boundary y = 1.
class RobinNonlinearity {
public:
    using Evaluator = std::function<NonlinearityValues(double, double)>;

    /// `exact` supplies closed-form reduced coefficients; otherwise they are
    /// extracted by finite differences of g at the origin.
    RobinNonlinearity(std::string family, Evaluator eval, std::optional<ReducedCoefficients> exact = {});

    NonlinearityValues operator()(double z, double lambda) const { return eval_(z, lambda); }
    const std::string& family() const { return family_; }
    ReducedCoefficients reduced() const;
    /// Finite-difference extraction, independent of any closed form.
    ReducedCoefficients reduced_numeric() const;

private:
    std::string family_;
    Evaluator eval_;
    std::optional<ReducedCoefficients> exact_;
};

/// G = a z^2 (z - lambda)^2 and its derivatives.
NonlinearityValues quartic_g(double z, double lambda, double a);
RobinNonlinearity quartic_nonlinearity(double a);

struct RobinState {
    Field u;
    double lambda = 0.0;
};

/// Averaged discrete gradient of G between top-row values a and b:
/// int_0^1 g(a + t (b - a)) dt by three-point Gauss quadrature.
struct DiscreteGradient {
    double value = 0.0;
    double d_a = 0.0;
    double d_b = 0.0;
    double d_lambda = 0.0;
};
DiscreteGradient discrete_gradient(const RobinNonlinearity& nl, double a, double b, double lambda);

/// Node-wise residual; every node carries its own equation.
///   y = 0:            u
///   x = -L:           u
///   x = +L:           u - lambda y
///   interior:         five-point Laplacian
///   y = 1 (interior): (u_N - u_{N-1})/dy - (dy/2) D_xx u_N - u_N + gbar
/// The top row is the finite-volume closure of the half cell below y = 1 with
/// the nonlinearity averaged over the neighbouring top values, which keeps the
/// discrete flow force exactly conserved.
Field robin_residual(const RobinState& s, const RobinNonlinearity& nl);

struct Linearization {
    Eigen::SparseMatrix<double> J;  ///< d residual / d u
    Eigen::VectorXd d_lambda;       ///< d residual / d lambda
};

Linearization robin_jacobian(const RobinState& s, const RobinNonlinearity& nl);

/// Discrete flow force on the half slice between columns i and i+1.
double robin_half_slice_flow_force(const RobinState& s, const RobinNonlinearity& nl, int i,
                                   double gradient_factor = 1.0);

/// Flow force at column x_index, the mean of the two adjacent half slices.
double flow_force_robin(const RobinState& s, const RobinNonlinearity& nl, int x_index);
/// Same quantity with the printed extra factor 1/2 on the gradient integral.
double flow_force_robin_printed(const RobinState& s, const RobinNonlinearity& nl, int x_index);
std::vector<double> flow_force_robin_profile(const RobinState& s, const RobinNonlinearity& nl);

struct ConjugateRoot {
    double r = 0.0;
    double G = 0.0;
    bool conjugate = false;  ///< |G(r)| within tolerance of G(0) = 0
};

struct ConjugateOptions {
    double bracket_margin = 1.0;  ///< bracket extends this far beyond [min(0,lambda), max(0,lambda)]
    int samples = 4000;
};

/// All real roots of g(., lambda) in the bracket, each flagged for conjugacy.
std::vector<ConjugateRoot> robin_roots(double lambda, const RobinNonlinearity& nl, const ConjugateOptions& opt = {});
/// Slopes r with g(r) = 0 and G(r) = G(0), sorted ascending.
std::vector<double> conjugate_set_robin(double lambda, const RobinNonlinearity& nl,
                                        const ConjugateOptions& opt = {});

double kappa1_robin(const RobinNonlinearity& nl);

/// Leading-order front (lambda/2)(1 + tanh(kappa1 |lambda| (x + shift))) y.
RobinState seed_robin(double lambda, const Grid& g, const RobinNonlinearity& nl, double shift = 0.0,
                      double lambda_seed_max = 0.15);

/// Max defect of the tanh heteroclinic in the truncated reduced equation.
double verify_truncated_heteroclinic(double lambda, const RobinNonlinearity& nl, int samples = 1001,
                                     double half_width = 50.0);

}  // namespace frontcont
