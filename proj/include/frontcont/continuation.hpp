#pragma once

#include "frontcont/bore.hpp"
#include "frontcont/grid.hpp"
#include "frontcont/robin.hpp"
#include "frontcont/spectral.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace frontcont {

struct ContinuationConfig {
    double ds = 0.005;
    double ds_min = 1e-6;
    double ds_max = 0.02;
    double eps_newton = 1e-10;
    int max_newton = 12;
    int max_steps = 40;
    int fast_newton = 3;  ///< grow ds when the corrector needs at most this many iterations
    double ds_grow = 1.3;
    double N_max = 1e6;
    double lambda_max = std::numeric_limits<double>::infinity();
    double tol_plateau = 0.02;
    double plateau_fraction = 0.15;
    double plateau_state_tol = 1e-10;
    double sigma_guard = 1e-3;
    double loop_tol = 1e-6;
    double tail_tol = 1e-6;
    double mono_floor = 1e-10;  ///< relative to max |d_x u|
    double flow_force_tol = 1e-6;
    double chi_width = 0.1;  ///< Gaussian width as a fraction of L
    int direction = 0;       ///< +1 increasing front, -1 decreasing, 0 from the seed
};

/// Named diagnostic emitted as an extra CSV column.
using NamedValue = std::pair<std::string, double>;

/// A front problem on a truncated cylinder, as seen by the continuation driver.
class FrontProblem {
public:
    virtual ~FrontProblem() = default;

    virtual std::string name() const = 0;
    virtual const Grid& grid() const = 0;
    virtual Field residual(const Field& u, double lambda) const = 0;
    virtual Linearization jacobian(const Field& u, double lambda) const = 0;
    /// Throws SolverError naming the guard when (u, lambda) is not admissible.
    virtual void require_admissible(const Field& u, double lambda) const = 0;
    virtual std::vector<double> flow_force_profile(const Field& u, double lambda) const = 0;
    virtual SpectralMargin spectral_margin(const Field& u, double lambda, double tail_tol) const = 0;
    /// Seed for the problem's small-amplitude parameter (lambda for Robin, eps for the bore).
    virtual std::pair<Field, double> seed(double param) const = 0;
    virtual double seed_parameter() const = 0;
    /// Parameter value at which the trivial branch bifurcates.
    virtual double lambda_bifurcation() const = 0;
    /// Extra diagnostics written per point (empty for Robin).
    virtual std::vector<NamedValue> extra_diagnostics(const Field& u, double lambda) const = 0;
    virtual std::vector<std::string> extra_names() const = 0;
    /// Additional term in the blowup proxy N.
    virtual double blowup_extra(const Field& u, double lambda) const = 0;
    /// Non-empty message when an admissibility guard is about to trip.
    virtual std::string guard_warning(const Field& u, double lambda) const = 0;
    /// Slots of the cross-section inside the domain or on the oblique/interface boundary.
    bool monotone_slot(int k) const;
};

class RobinProblem : public FrontProblem {
public:
    RobinProblem(Grid g, RobinNonlinearity nl, double lambda_seed, double lambda_seed_max = 0.15);

    std::string name() const override { return "robin"; }
    const Grid& grid() const override { return grid_; }
    Field residual(const Field& u, double lambda) const override;
    Linearization jacobian(const Field& u, double lambda) const override;
    void require_admissible(const Field& u, double lambda) const override;
    std::vector<double> flow_force_profile(const Field& u, double lambda) const override;
    SpectralMargin spectral_margin(const Field& u, double lambda, double tail_tol) const override;
    std::pair<Field, double> seed(double param) const override;
    double seed_parameter() const override { return lambda_seed_; }
    double lambda_bifurcation() const override { return 0.0; }
    std::vector<NamedValue> extra_diagnostics(const Field&, double) const override { return {}; }
    std::vector<std::string> extra_names() const override { return {}; }
    double blowup_extra(const Field&, double) const override { return 0.0; }
    std::string guard_warning(const Field&, double) const override { return {}; }

    const RobinNonlinearity& nonlinearity() const { return nl_; }

private:
    Grid grid_;
    RobinNonlinearity nl_;
    double lambda_seed_;
    double lambda_seed_max_;
};

class BoreProblem : public FrontProblem {
public:
    BoreProblem(Grid g, double rho1, double rho2, double eps_seed, double delta = 1e-3,
                double eps_seed_max = 0.05);

    std::string name() const override { return "bore"; }
    const Grid& grid() const override { return grid_; }
    Field residual(const Field& u, double lambda) const override;
    Linearization jacobian(const Field& u, double lambda) const override;
    void require_admissible(const Field& u, double lambda) const override;
    std::vector<double> flow_force_profile(const Field& u, double lambda) const override;
    SpectralMargin spectral_margin(const Field& u, double lambda, double tail_tol) const override;
    std::pair<Field, double> seed(double param) const override;
    double seed_parameter() const override { return eps_seed_; }
    double lambda_bifurcation() const override { return lambda_star(rho1_, rho2_); }
    std::vector<NamedValue> extra_diagnostics(const Field& u, double lambda) const override;
    std::vector<std::string> extra_names() const override;
    double blowup_extra(const Field& u, double lambda) const override;
    std::string guard_warning(const Field& u, double lambda) const override;

    BoreState state(const Field& u, double lambda) const;
    double delta() const { return delta_; }

private:
    Grid grid_;
    double rho1_, rho2_, eps_seed_, delta_, eps_seed_max_;
};

/// Normalized Gaussian bump centred at x = 0 on the anchor row.
Eigen::VectorXd bordering_function(const Grid& g, double width_fraction);

/// u(0, y0) - u(+L, y0)/2 on the anchor row.
double phase_value(const Field& u);

/// Weighted inner product: mean over nodes for the field plus the lambda product.
double weighted_dot(const Eigen::VectorXd& a_u, double a_l, const Eigen::VectorXd& b_u, double b_l);

/// Arclength row <(u, lambda) - (u0, lambda0), t> = ds, or lambda = lambda_target when fixed.
struct ArcConstraint {
    bool fixed_lambda = false;
    double lambda_target = 0.0;
    Eigen::VectorXd t_u;
    double t_lambda = 0.0;
    Eigen::VectorXd u0;
    double lambda0 = 0.0;
    double ds = 0.0;

    static ArcConstraint fixed(double lambda);
    double value(const Eigen::VectorXd& u, double lambda) const;
};

struct NewtonResult {
    Field u;
    double lambda = 0.0;
    double mu = 0.0;
    int iterations = 0;
    double residual = 0.0;  ///< max |F + mu chi|
    double phase = 0.0;
};

/// Damped Newton on the bordered system (F + mu chi, C u, arclength) in (u, lambda, mu).
NewtonResult newton_correct(const FrontProblem& problem, const Field& guess, double lambda_guess, double mu_guess,
                            const ArcConstraint& arc, const ContinuationConfig& cfg);

struct MonotoneReport {
    bool ok = false;
    double min_dxu = 0.0;
    double max_dxu = 0.0;
};

/// Sign of d_x u on the interior and oblique/interface slots; direction 0 infers it.
MonotoneReport monotone_check(const FrontProblem& problem, const Field& u, int direction, double mono_floor = 1e-10);

struct PointDiagnostics {
    double residual = 0.0;
    double phase = 0.0;
    double flow_force = 0.0;
    double flow_force_dev = 0.0;
    double sigma_minus = 0.0;
    double sigma_plus = 0.0;
    bool eigen_positive = false;
    double min_dxu = 0.0;
    double max_dxu = 0.0;
    bool monotone = false;
    double norm_inf = 0.0;
    double norm_c2 = 0.0;
    double N = 0.0;
    std::vector<NamedValue> extras;
};

struct BranchPoint {
    Field u;
    double lambda = 0.0;
    double mu = 0.0;
    double s = 0.0;
    int newton_iters = 0;
    bool accepted = false;
    PointDiagnostics diag;
};

enum class Termination {
    blowup,
    heteroclinic_degeneracy,
    spectral_degeneracy,
    loop,
    step_budget,
    solver_failure
};

std::string to_string(Termination t);
/// Short tag (A1..A4, budget, failure).
std::string tag(Termination t);

struct TerminationReport {
    Termination kind = Termination::step_budget;
    std::string message;
};

struct Branch {
    std::vector<BranchPoint> points;
    TerminationReport termination;
    std::vector<std::string> extra_names;
};

/// Maximal run of low-gradient interior columns found by the plateau detector.
struct PlateauReport {
    bool found = false;
    int first = 0;
    int last = 0;
    double width = 0.0;
    double state_residual = 0.0;
    double distance_upstream = 0.0;
    double distance_downstream = 0.0;
};

PlateauReport detect_plateau(const FrontProblem& problem, const Field& u, double lambda,
                             const ContinuationConfig& cfg);

/// Distance of the last point to the closest earlier point that is not a near neighbour.
double loop_distance(const std::vector<BranchPoint>& points);

/// Priority A3 > A2 > A1 > A4; nullopt when the branch may continue.
std::optional<TerminationReport> classify_termination(const FrontProblem& problem,
                                                      const std::vector<BranchPoint>& points,
                                                      const ContinuationConfig& cfg);

PointDiagnostics diagnose(const FrontProblem& problem, const Field& u, double lambda, double mu,
                          const ContinuationConfig& cfg);

/// Empty string when every branch-point invariant holds, otherwise the first violation.
std::string invariant_violation(const BranchPoint& p, const ContinuationConfig& cfg, int direction);

struct Prediction {
    Field u;
    double lambda = 0.0;
    ArcConstraint arc;
};

/// Secant predictor through two accepted points.
Prediction tangent_predict(const BranchPoint& p1, const BranchPoint& p2, double ds);

/// Optional per-step observer (step index, point) for logging.
using StepObserver = std::function<void(int, const BranchPoint&)>;

Branch run_branch(const FrontProblem& problem, const ContinuationConfig& cfg, const StepObserver& observer = {});

}  // namespace frontcont
