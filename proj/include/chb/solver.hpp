#pragma once

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <chrono>
#include <cmath>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "chb/errors.hpp"
#include "chb/system.hpp"

namespace chb {

enum class LinearMethod { Auto, Direct, Iterative };

struct SolverConfig {
    double newton_abs_tol = 1e-6; // max-norm of the Newton increment
    int newton_max_iter = 25;
    double linear_rel_tol = 1e-10;
    int linear_max_iter = 2000;
    LinearMethod linear_method = LinearMethod::Auto;
    double damping = 1.0;

    bool operator==(const SolverConfig&) const = default;

    void validate() const {
        if (!(newton_abs_tol > 0.0)) throw ConfigError("newton_abs_tol must be > 0");
        if (newton_max_iter < 1) throw ConfigError("newton_max_iter must be >= 1");
        if (!(linear_rel_tol > 0.0)) throw ConfigError("linear_rel_tol must be > 0");
        if (linear_max_iter < 1) throw ConfigError("linear_max_iter must be >= 1");
        if (!(damping > 0.0)) throw ConfigError("damping must be > 0");
    }
};

/// Convergence bookkeeping for one nonlinear (or linear) solve.
struct SolveReport {
    int newton_iters = 0;
    std::vector<double> increment_norms;   // per Newton iteration, max norm
    std::vector<double> linear_residuals;  // ||Ax-b|| per linear solve
    int linear_solves = 0;
    double wall_ms = 0.0;
    bool converged = false;
};

/// Newton or linear-solver failure; carries the iteration log.
class SolverError : public Error {
public:
    SolverError(const std::string& msg, SolveReport rep = {})
        : Error(msg), report(std::move(rep)) {}
    SolveReport report;
};

namespace detail {

inline int dof_threshold_direct() { return 200000; }

inline Eigen::VectorXd solve_direct(const DiscreteSystem& sys, const Eigen::VectorXd& b) {
    Eigen::SparseMatrix<double> acol = sys.matrix; // SparseLU wants column-major
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.analyzePattern(acol);
    lu.factorize(acol);
    if (lu.info() != Eigen::Success)
        throw SolverError("linear solve: sparse LU factorization failed (singular system?)");
    return lu.solve(b);
}

inline Eigen::VectorXd solve_iterative(const DiscreteSystem& sys, const Eigen::VectorXd& b,
                                       const SolverConfig& cfg, SolveReport* rep) {
    Eigen::BiCGSTAB<Eigen::SparseMatrix<double, Eigen::RowMajor>,
                    Eigen::IncompleteLUT<double>> krylov;
    krylov.setTolerance(cfg.linear_rel_tol);
    krylov.setMaxIterations(cfg.linear_max_iter);
    krylov.compute(sys.matrix);
    if (krylov.info() != Eigen::Success)
        throw SolverError("linear solve: ILU preconditioner setup failed");
    Eigen::VectorXd x = krylov.solve(b);
    if (krylov.info() != Eigen::Success) {
        SolveReport r = rep ? *rep : SolveReport{};
        r.linear_residuals.push_back(krylov.error());
        throw SolverError("linear solve: BiCGSTAB did not converge after " +
                              std::to_string(krylov.iterations()) + " iterations",
                          r);
    }
    return x;
}

} // namespace detail

/// Solves the assembled system to ||Ax - b|| <= linear_rel_tol ||b||
/// (absolute 1e-14 when b vanishes). Throws SolverError on breakdown.
inline Eigen::VectorXd linear_solve(const DiscreteSystem& sys, const SolverConfig& cfg,
                                    SolveReport* report = nullptr) {
    if (sys.matrix.rows() != sys.matrix.cols())
        throw std::invalid_argument("linear_solve: matrix not square");
    if (sys.rhs.size() != sys.matrix.rows())
        throw std::invalid_argument("linear_solve: rhs size mismatch");

    const Eigen::VectorXd& b = sys.rhs;
    LinearMethod method = cfg.linear_method;
    if (method == LinearMethod::Auto)
        method = (sys.matrix.rows() < detail::dof_threshold_direct()) ? LinearMethod::Direct
                                                                      : LinearMethod::Iterative;

    Eigen::VectorXd x = (method == LinearMethod::Direct)
                            ? detail::solve_direct(sys, b)
                            : detail::solve_iterative(sys, b, cfg, report);

    const double bnorm = b.norm();
    const double resid = (sys.matrix * x - b).norm();
    if (report) {
        report->linear_solves += 1;
        report->linear_residuals.push_back(resid);
    }
    if (!std::isfinite(resid))
        throw SolverError("linear solve: non-finite residual");
    if (resid > cfg.linear_rel_tol * bnorm && resid > 1e-14) {
        SolveReport r = report ? *report : SolveReport{};
        throw SolverError("linear solve: residual " + std::to_string(resid) +
                              " exceeds tolerance for ||b||=" + std::to_string(bnorm),
                          r);
    }
    return x;
}

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<DiscreteSystem(const Eigen::VectorXd&)>;

/// Newton iteration with absolute incremental stopping: terminates once
/// ||dx||_inf <= newton_abs_tol. Returns the final iterate with the full log;
/// throws SolverError (carrying the log) on NaN residuals or when the
/// iteration budget is exhausted.
inline std::pair<Eigen::VectorXd, SolveReport> newton_solve(const ResidualFn& residual,
                                                            const JacobianFn& jacobian,
                                                            Eigen::VectorXd x,
                                                            const SolverConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport rep;
    for (int it = 1; it <= cfg.newton_max_iter; ++it) {
        Eigen::VectorXd r = residual(x);
        if (!r.allFinite())
            throw SolverError("newton: residual contains NaN/Inf at iteration " +
                                  std::to_string(it),
                              rep);
        DiscreteSystem sys = jacobian(x);
        sys.rhs = -r;
        Eigen::VectorXd dx = linear_solve(sys, cfg, &rep);
        x += cfg.damping * dx;
        const double inc = dx.lpNorm<Eigen::Infinity>();
        rep.newton_iters = it;
        rep.increment_norms.push_back(inc);
        if (inc <= cfg.newton_abs_tol) {
            rep.converged = true;
            rep.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
            return {std::move(x), std::move(rep)};
        }
    }
    rep.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    throw SolverError("newton: no convergence within " + std::to_string(cfg.newton_max_iter) +
                          " iterations (last increment " +
                          std::to_string(rep.increment_norms.empty() ? 0.0
                                                                     : rep.increment_norms.back()) +
                          ")",
                      rep);
}

} // namespace chb
