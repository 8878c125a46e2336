#include "frontcont/continuation.hpp"

#include "frontcont/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace frontcont {

bool FrontProblem::monotone_slot(int k) const {
    const Grid& g = grid();
    if (g.layout == Layout::single) return k >= 1;
    return k != 0 && k != g.column_size() - 1;
}

// ---------------------------------------------------------------- Robin

RobinProblem::RobinProblem(Grid g, RobinNonlinearity nl, double lambda_seed, double lambda_seed_max)
    : grid_(std::move(g)), nl_(std::move(nl)), lambda_seed_(lambda_seed), lambda_seed_max_(lambda_seed_max) {
    if (grid_.layout != Layout::single) throw ConfigError("grid.layout", "Robin problem needs a single-layer grid");
}

Field RobinProblem::residual(const Field& u, double lambda) const { return robin_residual({u, lambda}, nl_); }

Linearization RobinProblem::jacobian(const Field& u, double lambda) const {
    return robin_jacobian({u, lambda}, nl_);
}

void RobinProblem::require_admissible(const Field& u, double lambda) const {
    if (!std::isfinite(lambda) || !u.values.allFinite()) throw SolverError("non-finite iterate", "finite");
}

std::vector<double> RobinProblem::flow_force_profile(const Field& u, double lambda) const {
    return flow_force_robin_profile({u, lambda}, nl_);
}

SpectralMargin RobinProblem::spectral_margin(const Field& u, double lambda, double tail_tol) const {
    return frontcont::spectral_margin(RobinState{u, lambda}, nl_, tail_tol);
}

std::pair<Field, double> RobinProblem::seed(double param) const {
    RobinState s = seed_robin(param, grid_, nl_, 0.0, lambda_seed_max_);
    return {std::move(s.u), s.lambda};
}

// ---------------------------------------------------------------- bore

BoreProblem::BoreProblem(Grid g, double rho1, double rho2, double eps_seed, double delta, double eps_seed_max)
    : grid_(std::move(g)), rho1_(rho1), rho2_(rho2), eps_seed_(eps_seed), delta_(delta), eps_seed_max_(eps_seed_max) {
    if (grid_.layout != Layout::two_layer) throw ConfigError("grid.layout", "bore problem needs a two-layer grid");
    validate(BoreParams{rho1, rho2, 0.5});
    if (!(delta > 0.0)) throw ConfigError("bore.delta", "delta must be positive");
}

BoreState BoreProblem::state(const Field& u, double lambda) const { return {u, BoreParams{rho1_, rho2_, lambda}}; }

Field BoreProblem::residual(const Field& u, double lambda) const { return bore_residual(state(u, lambda)); }

Linearization BoreProblem::jacobian(const Field& u, double lambda) const { return bore_jacobian(state(u, lambda)); }

void BoreProblem::require_admissible(const Field& u, double lambda) const {
    if (!std::isfinite(lambda) || !u.values.allFinite()) throw SolverError("non-finite iterate", "finite");
    if (!(lambda > 0.0 && lambda < 1.0)) {
        std::ostringstream os;
        os << "lambda = " << lambda << " left (0, 1)";
        throw SolverError(os.str(), "lambda");
    }
    const EllipticityReport e = bore_ellipticity(state(u, lambda));
    if (!(e.min > delta_)) {
        std::ostringstream os;
        os << "ellipticity margin " << e.min << " <= delta = " << delta_ << " at (i=" << e.i << ", k=" << e.k << ")";
        throw SolverError(os.str(), "ellipticity");
    }
}

std::vector<double> BoreProblem::flow_force_profile(const Field& u, double lambda) const {
    return flow_force_bore_profile(state(u, lambda));
}

SpectralMargin BoreProblem::spectral_margin(const Field& u, double lambda, double tail_tol) const {
    return frontcont::spectral_margin(state(u, lambda), tail_tol);
}

std::pair<Field, double> BoreProblem::seed(double param) const {
    BoreState s = seed_bore(param, grid_, rho1_, rho2_, 0.0, eps_seed_max_);
    return {std::move(s.u), s.params.lambda};
}

std::vector<std::string> BoreProblem::extra_names() const {
    return {"ellipticity_margin", "stagnation_indicator", "interface_max_slope", "wall_gap"};
}

std::vector<NamedValue> BoreProblem::extra_diagnostics(const Field& u, double lambda) const {
    const BoreDiagnostics d = bore_diagnostics(state(u, lambda));
    return {{"ellipticity_margin", d.ellipticity_margin},
            {"stagnation_indicator", d.stagnation_indicator},
            {"interface_max_slope", d.interface_max_slope},
            {"wall_gap", d.wall_gap}};
}

double BoreProblem::blowup_extra(const Field& u, double lambda) const {
    return 1.0 / bore_ellipticity(state(u, lambda)).min;
}

std::string BoreProblem::guard_warning(const Field& u, double lambda) const {
    std::ostringstream os;
    if (1.0 / lambda + 1.0 / (1.0 - lambda) >= 0.5 / delta_) {
        os << "lambda = " << lambda << " approaching a wall (1/lambda + 1/(1-lambda) >= 1/(2 delta))";
        return os.str();
    }
    const double m = bore_ellipticity(state(u, lambda)).min;
    if (m <= 2.0 * delta_) {
        os << "ellipticity margin " << m << " <= 2 delta";
        return os.str();
    }
    return {};
}

// ---------------------------------------------------------------- bordering

Eigen::VectorXd bordering_function(const Grid& g, double width_fraction) {
    Eigen::VectorXd chi = Eigen::VectorXd::Zero(g.size());
    const double w = width_fraction * g.L;
    for (int i = 1; i < g.nx - 1; ++i) {
        const double x = g.x(i) / w;
        chi[g.index(i, g.anchor_slot())] = std::exp(-x * x);
    }
    return chi / chi.norm();
}

double phase_value(const Field& u) {
    const Grid& g = u.grid;
    return u(g.center(), g.anchor_slot()) - 0.5 * u(g.nx - 1, g.anchor_slot());
}

double weighted_dot(const Eigen::VectorXd& a_u, double a_l, const Eigen::VectorXd& b_u, double b_l) {
    return a_u.dot(b_u) / static_cast<double>(a_u.size()) + a_l * b_l;
}

ArcConstraint ArcConstraint::fixed(double lambda) {
    ArcConstraint a;
    a.fixed_lambda = true;
    a.lambda_target = lambda;
    return a;
}

double ArcConstraint::value(const Eigen::VectorXd& u, double lambda) const {
    if (fixed_lambda) return lambda - lambda_target;
    return weighted_dot(u - u0, lambda - lambda0, t_u, t_lambda) - ds;
}

namespace {

struct BorderedResidual {
    Eigen::VectorXd F;  // F + mu chi
    double C = 0.0;
    double A = 0.0;
    double max_F() const { return F.size() ? F.cwiseAbs().maxCoeff() : 0.0; }
    double merit() const { return std::sqrt(F.squaredNorm() + C * C + A * A); }
};

BorderedResidual evaluate(const FrontProblem& problem, const Field& u, double lambda, double mu,
                          const Eigen::VectorXd& chi, const ArcConstraint& arc) {
    BorderedResidual r;
    r.F = problem.residual(u, lambda).values + mu * chi;
    r.C = phase_value(u);
    r.A = arc.value(u.values, lambda);
    return r;
}

}  // namespace

NewtonResult newton_correct(const FrontProblem& problem, const Field& guess, double lambda_guess, double mu_guess,
                            const ArcConstraint& arc, const ContinuationConfig& cfg) {
    const Grid& g = problem.grid();
    if (!(guess.grid == g)) throw ShapeError("newton_correct: guess does not match the problem grid");
    const int n = g.size();
    const Eigen::VectorXd chi = bordering_function(g, cfg.chi_width);
    const int a0 = g.index(g.center(), g.anchor_slot());
    const int a1 = g.index(g.nx - 1, g.anchor_slot());

    problem.require_admissible(guess, lambda_guess);
    NewtonResult out;
    out.u = guess;
    out.lambda = lambda_guess;
    out.mu = mu_guess;
    BorderedResidual res = evaluate(problem, out.u, out.lambda, out.mu, chi, arc);

    for (int it = 0;; ++it) {
        out.iterations = it;
        out.residual = res.max_F();
        out.phase = res.C;
        if (out.residual <= cfg.eps_newton && std::abs(res.C) <= cfg.eps_newton && std::abs(res.A) <= cfg.eps_newton)
            return out;
        if (it == cfg.max_newton) {
            std::ostringstream os;
            os << "Newton did not converge in " << cfg.max_newton << " iterations (residual " << out.residual
               << ", phase " << res.C << ")";
            throw SolverError(os.str());
        }

        const Linearization lin = problem.jacobian(out.u, out.lambda);
        std::vector<Eigen::Triplet<double>> t;
        t.reserve(static_cast<size_t>(lin.J.nonZeros()) + 3 * static_cast<size_t>(n));
        for (int c = 0; c < lin.J.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator itj(lin.J, c); itj; ++itj)
                t.emplace_back(static_cast<int>(itj.row()), static_cast<int>(itj.col()), itj.value());
        for (int r = 0; r < n; ++r) {
            if (lin.d_lambda[r] != 0.0) t.emplace_back(r, n, lin.d_lambda[r]);
            if (chi[r] != 0.0) t.emplace_back(r, n + 1, chi[r]);
        }
        t.emplace_back(n, a0, 1.0);
        t.emplace_back(n, a1, -0.5);
        if (arc.fixed_lambda) {
            t.emplace_back(n + 1, n, 1.0);
        } else {
            for (int c = 0; c < n; ++c)
                if (arc.t_u[c] != 0.0) t.emplace_back(n + 1, c, arc.t_u[c] / n);
            t.emplace_back(n + 1, n, arc.t_lambda);
        }
        Eigen::SparseMatrix<double> B(n + 2, n + 2);
        B.setFromTriplets(t.begin(), t.end());
        B.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
        lu.compute(B);
        if (lu.info() != Eigen::Success)
            throw SolverError("bordered matrix is singular (one-dimensional kernel assumption fails?): " +
                              lu.lastErrorMessage());
        Eigen::VectorXd rhs(n + 2);
        rhs.head(n) = -res.F;
        rhs[n] = -res.C;
        rhs[n + 1] = -res.A;
        const Eigen::VectorXd d = lu.solve(rhs);
        if (!d.allFinite()) throw SolverError("bordered solve produced non-finite values");

        const double m0 = res.merit();
        std::string guard, guard_msg;
        bool accepted = false;
        for (double alpha = 1.0; alpha >= 1.0 / 1024.0; alpha *= 0.5) {
            Field u1 = out.u;
            u1.values += alpha * d.head(n);
            const double l1 = out.lambda + alpha * d[n];
            const double mu1 = out.mu + alpha * d[n + 1];
            try {
                problem.require_admissible(u1, l1);
                BorderedResidual r1 = evaluate(problem, u1, l1, mu1, chi, arc);
                if (r1.merit() < (1.0 - 1e-4 * alpha) * m0) {
                    out.u = std::move(u1);
                    out.lambda = l1;
                    out.mu = mu1;
                    res = std::move(r1);
                    accepted = true;
                    break;
                }
            } catch (const SolverError& e) {
                guard = e.guard();
                guard_msg = e.what();
            } catch (const DomainError& e) {
                guard = "ellipticity";
                guard_msg = e.what();
            }
        }
        if (!accepted) {
            std::string msg = "line search failed at Newton iteration " + std::to_string(it + 1);
            if (!guard.empty()) msg += " (guard '" + guard + "' tripped: " + guard_msg + ")";
            throw SolverError(msg, guard);
        }
    }
}

MonotoneReport monotone_check(const FrontProblem& problem, const Field& u, int direction, double mono_floor) {
    const Grid& g = u.grid;
    const Field dxu = differentiate(u, Axis::x, 1);
    MonotoneReport r;
    r.min_dxu = std::numeric_limits<double>::infinity();
    r.max_dxu = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < g.nx; ++i)
        for (int k = 0; k < g.column_size(); ++k) {
            if (!problem.monotone_slot(k)) continue;
            r.min_dxu = std::min(r.min_dxu, dxu(i, k));
            r.max_dxu = std::max(r.max_dxu, dxu(i, k));
        }
    const double scale = std::max(std::abs(r.min_dxu), std::abs(r.max_dxu));
    const double floor = mono_floor * scale;
    if (direction == 0) {
        const double jump = u(g.nx - 1, g.anchor_slot()) - u(0, g.anchor_slot());
        direction = jump > 0.0 ? 1 : (jump < 0.0 ? -1 : 0);
    }
    if (direction > 0) r.ok = r.min_dxu >= -floor && r.max_dxu > floor;
    else if (direction < 0) r.ok = r.max_dxu <= floor && r.min_dxu < -floor;
    else r.ok = false;
    return r;
}

namespace {

double c2_proxy(const Field& u) {
    const Field ux = differentiate(u, Axis::x, 1);
    const Field uy = differentiate(u, Axis::y, 1);
    const Field uxx = differentiate(u, Axis::x, 2);
    const Field uyy = differentiate(u, Axis::y, 2);
    const Field uxy = differentiate(ux, Axis::y, 1);
    double m = 0.0;
    for (const Field* f : {&u, &ux, &uy, &uxx, &uyy, &uxy}) m = std::max(m, f->values.cwiseAbs().maxCoeff());
    return m;
}

}  // namespace

PointDiagnostics diagnose(const FrontProblem& problem, const Field& u, double lambda, double mu,
                          const ContinuationConfig& cfg) {
    const Grid& g = u.grid;
    PointDiagnostics d;
    d.residual = (problem.residual(u, lambda).values + mu * bordering_function(g, cfg.chi_width)).cwiseAbs().maxCoeff();
    d.phase = phase_value(u);
    const std::vector<double> S = problem.flow_force_profile(u, lambda);
    d.flow_force = S[static_cast<size_t>(g.center())];
    for (double v : S) d.flow_force_dev = std::max(d.flow_force_dev, std::abs(v - d.flow_force));
    const SpectralMargin sm = problem.spectral_margin(u, lambda, cfg.tail_tol);
    d.sigma_minus = sm.sigma_minus;
    d.sigma_plus = sm.sigma_plus;
    d.eigen_positive = sm.positivity_ok;
    const MonotoneReport mr = monotone_check(problem, u, cfg.direction, cfg.mono_floor);
    d.min_dxu = mr.min_dxu;
    d.max_dxu = mr.max_dxu;
    d.monotone = mr.ok;
    d.norm_inf = u.values.cwiseAbs().maxCoeff();
    d.norm_c2 = c2_proxy(u);
    d.N = d.norm_c2 + std::abs(lambda) + problem.blowup_extra(u, lambda);
    d.extras = problem.extra_diagnostics(u, lambda);
    return d;
}

std::string invariant_violation(const BranchPoint& p, const ContinuationConfig& cfg, int direction) {
    std::ostringstream os;
    const PointDiagnostics& d = p.diag;
    if (!(d.residual <= cfg.eps_newton)) os << "residual " << d.residual << " > eps_newton";
    else if (!(std::abs(d.phase) <= cfg.eps_newton)) os << "|C u| = " << std::abs(d.phase) << " > eps_newton";
    else if (!(std::abs(p.mu) <= 10.0 * cfg.eps_newton)) os << "|mu| = " << std::abs(p.mu) << " > 10 eps_newton";
    else if (!d.monotone)
        os << "front not monotone (direction " << direction << ", min d_x u " << d.min_dxu << ", max d_x u "
           << d.max_dxu << ")";
    else if (!(d.flow_force_dev <= cfg.flow_force_tol * (1.0 + std::abs(d.flow_force))))
        os << "flow-force deviation " << d.flow_force_dev << " exceeds tolerance";
    else if (!d.eigen_positive) os << "principal eigenfunction not positive";
    return os.str();
}

std::string to_string(Termination t) {
    switch (t) {
        case Termination::blowup: return "blowup";
        case Termination::heteroclinic_degeneracy: return "heteroclinic_degeneracy";
        case Termination::spectral_degeneracy: return "spectral_degeneracy";
        case Termination::loop: return "loop";
        case Termination::step_budget: return "step_budget";
        case Termination::solver_failure: return "solver_failure";
    }
    return "unknown";
}

std::string tag(Termination t) {
    switch (t) {
        case Termination::blowup: return "A1";
        case Termination::heteroclinic_degeneracy: return "A2";
        case Termination::spectral_degeneracy: return "A3";
        case Termination::loop: return "A4";
        case Termination::step_budget: return "budget";
        case Termination::solver_failure: return "failure";
    }
    return "unknown";
}

PlateauReport detect_plateau(const FrontProblem& problem, const Field& u, double lambda,
                             const ContinuationConfig& cfg) {
    const Grid& g = u.grid;
    const Field dxu = differentiate(u, Axis::x, 1);
    std::vector<double> col(static_cast<size_t>(g.nx), 0.0);
    double gmax = 0.0;
    for (int i = 0; i < g.nx; ++i) {
        for (int k = 0; k < g.column_size(); ++k)
            if (problem.monotone_slot(k)) col[static_cast<size_t>(i)] = std::max(col[static_cast<size_t>(i)], std::abs(dxu(i, k)));
        gmax = std::max(gmax, col[static_cast<size_t>(i)]);
    }
    PlateauReport best;
    if (!(gmax > 0.0)) return best;
    auto low = [&](int i) { return col[static_cast<size_t>(i)] <= cfg.tol_plateau * gmax; };
    for (int i = 1; i < g.nx - 1;) {
        if (!low(i)) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < g.nx && low(j + 1)) ++j;
        // interior run: bounded on both sides by steep columns
        if (!low(i - 1) && j + 1 < g.nx && !low(j + 1)) {
            const double width = (j - i) * g.dx;
            if (width >= cfg.plateau_fraction * 2.0 * g.L && width > best.width) {
                PlateauReport r;
                r.first = i;
                r.last = j;
                r.width = width;
                const int m = (i + j) / 2;
                Field flat(g);
                for (int c = 0; c < g.nx; ++c)
                    for (int k = 0; k < g.column_size(); ++k) flat(c, k) = u(m, k);
                const Field R = problem.residual(flat, lambda);
                for (int k = 0; k < g.column_size(); ++k) {
                    r.state_residual = std::max(r.state_residual, std::abs(R(m, k)));
                    r.distance_upstream = std::max(r.distance_upstream, std::abs(u(m, k) - u(0, k)));
                    r.distance_downstream = std::max(r.distance_downstream, std::abs(u(m, k) - u(g.nx - 1, k)));
                }
                r.found = r.state_residual <= cfg.plateau_state_tol &&
                          r.distance_upstream > 10.0 * cfg.eps_newton &&
                          r.distance_downstream > 10.0 * cfg.eps_newton;
                if (r.found || !best.found) best = r;
            }
        }
        i = j + 1;
    }
    return best;
}

double loop_distance(const std::vector<BranchPoint>& points) {
    double best = std::numeric_limits<double>::infinity();
    if (points.size() < 4) return best;
    const BranchPoint& last = points.back();
    auto rms = [](const Field& u) { return std::sqrt(u.values.squaredNorm() / static_cast<double>(u.values.size())); };
    const double nl = rms(last.u);
    for (size_t k = 0; k + 3 < points.size(); ++k) {
        const BranchPoint& p = points[k];
        const double d = std::max({std::abs(nl - rms(p.u)), std::abs(last.lambda - p.lambda),
                                   std::abs(last.diag.flow_force - p.diag.flow_force)});
        best = std::min(best, d);
    }
    return best;
}

std::optional<TerminationReport> classify_termination(const FrontProblem& problem,
                                                      const std::vector<BranchPoint>& points,
                                                      const ContinuationConfig& cfg) {
    if (points.empty()) return std::nullopt;
    const BranchPoint& p = points.back();
    std::ostringstream os;
    if (std::max(p.diag.sigma_minus, p.diag.sigma_plus) >= -cfg.sigma_guard) {
        os << "principal eigenvalue entered (-sigma_guard, inf): sigma_minus = " << p.diag.sigma_minus
           << ", sigma_plus = " << p.diag.sigma_plus;
        return TerminationReport{Termination::spectral_degeneracy, os.str()};
    }
    const PlateauReport pr = detect_plateau(problem, p.u, p.lambda, cfg);
    if (pr.found) {
        os << "plateau over columns " << pr.first << ".." << pr.last << " (width " << pr.width
           << ") at an intermediate x-independent state";
        return TerminationReport{Termination::heteroclinic_degeneracy, os.str()};
    }
    if (p.diag.N >= cfg.N_max) {
        os << "blowup proxy N = " << p.diag.N << " >= N_max = " << cfg.N_max;
        return TerminationReport{Termination::blowup, os.str()};
    }
    if (std::abs(p.lambda) >= cfg.lambda_max) {
        os << "|lambda| = " << std::abs(p.lambda) << " >= lambda_max = " << cfg.lambda_max;
        return TerminationReport{Termination::blowup, os.str()};
    }
    const std::string guard = problem.guard_warning(p.u, p.lambda);
    if (!guard.empty()) return TerminationReport{Termination::blowup, "admissibility guard: " + guard};
    const double ld = loop_distance(points);
    if (ld <= cfg.loop_tol) {
        os << "candidate loop: distance " << ld << " to an earlier point";
        return TerminationReport{Termination::loop, os.str()};
    }
    return std::nullopt;
}

Prediction tangent_predict(const BranchPoint& p1, const BranchPoint& p2, double ds) {
    if (!(p1.u.grid == p2.u.grid)) throw ShapeError("tangent_predict: points live on different grids");
    const Eigen::VectorXd du = p2.u.values - p1.u.values;
    const double dl = p2.lambda - p1.lambda;
    const double norm = std::sqrt(weighted_dot(du, dl, du, dl));
    if (!(norm > 0.0)) throw Error("tangent_predict: degenerate tangent (identical points)");
    Prediction pr;
    pr.arc.t_u = du / norm;
    pr.arc.t_lambda = dl / norm;
    pr.arc.u0 = p2.u.values;
    pr.arc.lambda0 = p2.lambda;
    pr.arc.ds = ds;
    pr.u = p2.u;
    pr.u.values += ds * pr.arc.t_u;
    pr.lambda = p2.lambda + ds * pr.arc.t_lambda;
    return pr;
}

namespace {

double weighted_distance(const BranchPoint& a, const BranchPoint& b) {
    const Eigen::VectorXd du = a.u.values - b.u.values;
    const double dl = a.lambda - b.lambda;
    return std::sqrt(weighted_dot(du, dl, du, dl));
}

}  // namespace

Branch run_branch(const FrontProblem& problem, const ContinuationConfig& cfg, const StepObserver& observer) {
    Branch br;
    br.extra_names = problem.extra_names();
    auto fail = [&](const std::string& msg, const std::string& guard = {}) {
        if (guard == "ellipticity" || guard == "lambda")
            br.termination = {Termination::blowup, "admissibility guard tripped: " + msg};
        else br.termination = {Termination::solver_failure, msg};
        return br;
    };

    // seed and its parameter tangent, oriented away from the bifurcation point
    const double p0 = problem.seed_parameter();
    auto [u_seed, l_seed] = problem.seed(p0);
    const double h = 1e-4 * std::abs(p0);
    const double sgn = p0 > 0.0 ? 1.0 : -1.0;
    auto [u_back, l_back] = problem.seed(p0 - sgn * h);
    ArcConstraint arc;
    arc.t_u = (u_seed.values - u_back.values) / h;
    arc.t_lambda = (l_seed - l_back) / h;
    {
        const double nrm = std::sqrt(weighted_dot(arc.t_u, arc.t_lambda, arc.t_u, arc.t_lambda));
        arc.t_u /= nrm;
        arc.t_lambda /= nrm;
        if ((l_seed - problem.lambda_bifurcation()) * arc.t_lambda < 0.0) {
            arc.t_u = -arc.t_u;
            arc.t_lambda = -arc.t_lambda;
        }
    }
    arc.u0 = u_seed.values;
    arc.lambda0 = l_seed;
    arc.ds = 0.0;

    int direction = cfg.direction;
    if (direction == 0) {
        const Grid& g = problem.grid();
        const double jump = u_seed(g.nx - 1, g.anchor_slot()) - u_seed(0, g.anchor_slot());
        direction = jump > 0.0 ? 1 : -1;
    }
    ContinuationConfig run_cfg = cfg;
    run_cfg.direction = direction;

    auto accept = [&](NewtonResult&& nr, double s) -> std::string {
        BranchPoint p;
        p.u = std::move(nr.u);
        p.lambda = nr.lambda;
        p.mu = nr.mu;
        p.newton_iters = nr.iterations;
        p.diag = diagnose(problem, p.u, p.lambda, p.mu, run_cfg);
        p.s = s;
        if (!br.points.empty()) p.s = br.points.back().s + weighted_distance(p, br.points.back());
        const std::string bad = invariant_violation(p, run_cfg, direction);
        if (!bad.empty()) return bad;
        p.accepted = true;
        br.points.push_back(std::move(p));
        if (observer) observer(static_cast<int>(br.points.size()) - 1, br.points.back());
        return {};
    };

    try {
        NewtonResult nr = newton_correct(problem, u_seed, l_seed, 0.0, arc, run_cfg);
        const std::string bad = accept(std::move(nr), 0.0);
        if (!bad.empty()) return fail("seed point: invariant violated: " + bad);
    } catch (const SolverError& e) {
        return fail(std::string("seed correction failed: ") + e.what(), e.guard());
    } catch (const Error& e) {
        return fail(std::string("seed correction failed: ") + e.what());
    }
    if (auto t = classify_termination(problem, br.points, run_cfg)) {
        br.termination = *t;
        return br;
    }

    double ds = std::clamp(cfg.ds, cfg.ds_min, cfg.ds_max);
    for (int step = 1; step <= cfg.max_steps; ++step) {
        for (;;) {
            Prediction pr;
            if (br.points.size() >= 2) {
                pr = tangent_predict(br.points[br.points.size() - 2], br.points.back(), ds);
            } else {
                pr.arc = arc;
                pr.arc.u0 = br.points.back().u.values;
                pr.arc.lambda0 = br.points.back().lambda;
                pr.arc.ds = ds;
                pr.u = br.points.back().u;
                pr.u.values += ds * arc.t_u;
                pr.lambda = br.points.back().lambda + ds * arc.t_lambda;
            }
            std::string failure, guard;
            try {
                NewtonResult nr = newton_correct(problem, pr.u, pr.lambda, br.points.back().mu, pr.arc, run_cfg);
                const int iters = nr.iterations;
                const std::string bad = accept(std::move(nr), 0.0);
                if (!bad.empty())
                    return fail("step " + std::to_string(step) + ": invariant violated: " + bad);
                if (iters <= cfg.fast_newton) ds = std::min(ds * cfg.ds_grow, cfg.ds_max);
                break;
            } catch (const SolverError& e) {
                failure = e.what();
                guard = e.guard();
            } catch (const Error& e) {
                failure = e.what();
            }
            ds *= 0.5;
            if (ds < cfg.ds_min)
                return fail("step " + std::to_string(step) + ": step size below ds_min after failure: " + failure,
                            guard);
        }
        if (auto t = classify_termination(problem, br.points, run_cfg)) {
            br.termination = *t;
            return br;
        }
    }
    br.termination = {Termination::step_budget, "completed " + std::to_string(cfg.max_steps) + " steps"};
    return br;
}

}  // namespace frontcont
