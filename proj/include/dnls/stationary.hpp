#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "dnls/grid.hpp"
#include "dnls/nonlin.hpp"

namespace dnls::stationary {

using grid::Complex;
using grid::Field;

/// The discrete resolvent problem u + tau A_eps u = F, with
/// A_eps u = -i lap u - i V u - i a g_eps(u).
struct ResolventProblem {
    Field rhs;  // F
    double tau = 1.0;
    nonlin::AbsorptionParams params;
    grid::PotentialSpec potential;

    ResolventProblem(Field F, double tau_, nonlin::AbsorptionParams p, grid::PotentialSpec V);
};

enum class Method { newton, picard, hybrid };

const char* to_string(Method m) noexcept;

struct SolveReport {
    int iterations = 0;
    double residual_l2 = 0.0;
    Method method = Method::newton;
    bool apriori_ok = false;  // ||u|| <= ||F|| (1 + 1e-10), resolvent nonexpansivity
};

class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double best_residual, int iterations)
        : std::runtime_error(what), best_residual(best_residual), iterations(iterations) {}
    double best_residual;
    int iterations;
};

/// Cached factorization of the linear part M = I - i tau (lap + V); valid for
/// every epsilon, so it is shared across continuation stages and time steps.
class LinearPart {
public:
    LinearPart(const grid::GridSpec& g, double tau, const grid::PotentialSpec& V);
    ~LinearPart();
    LinearPart(LinearPart&&) noexcept;
    LinearPart& operator=(LinearPart&&) noexcept;

    const grid::GridSpec& spec() const;
    double tau() const;

    Field apply(const Field& u) const;  // M u
    /// Solves M x = b by iterative refinement on the cached factorization,
    /// stopping when the weighted L2 residual is <= tol.
    Field solve(const Field& b, double tol) const;

    struct Impl;
    Impl* impl() const { return impl_.get(); }

private:
    std::unique_ptr<Impl> impl_;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 60;
    enum class Force { automatic, newton_only, picard_only } force = Force::automatic;
};

struct SolveResult {
    Field u;
    SolveReport report;
};

/// u + tau A_eps u - F evaluated on the problem's grid.
Field residual(const ResolventProblem& prob, const Field& u);

/// Newton with a preconditioned Krylov inner solve (GMRES, right-preconditioned
/// by the cached linear-part factorization, residual stopping at tol/10),
/// falling back to relaxed Picard. eps = 0 admits only Picard since the sharp
/// law is not differentiable at 0.
SolveResult resolvent_solve(const ResolventProblem& prob, const SolveOptions& opts,
                            const Field* warm_start = nullptr,
                            const LinearPart* cache = nullptr);

SolveResult resolvent_solve(const ResolventProblem& prob, double tol, int max_iter);

/// Brute-force reference: dense real 2n x 2n Jacobian by central finite
/// differences, guarded Newton with a direct dense solve. Requires at most 64
/// nodes. Independent of the sparse path above.
Field dense_oracle_solve(const ResolventProblem& prob, double tol);

struct ContinuationStage {
    double epsilon = 0.0;
    SolveReport report;
    double increment = 0.0;  // ||u_n - u_{n-1}||_2, 0 for the first stage
};

struct ContinuationResult {
    Field u;
    std::vector<ContinuationStage> stages;
};

/// Warm-started solves along a strictly decreasing epsilon schedule
/// (schedule.front() > 0, schedule.back() >= 0).
ContinuationResult eps_continuation(const ResolventProblem& prob,
                                    const std::vector<double>& schedule, double tol,
                                    int max_iter = 60);

}  // namespace dnls::stationary
