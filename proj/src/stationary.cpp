#include "dnls/stationary.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <utility>

namespace dnls::stationary {

namespace {

using EVec = Eigen::VectorXcd;
using ESparse = Eigen::SparseMatrix<Complex>;

EVec to_eigen(const Field& f) {
    EVec v(static_cast<Eigen::Index>(f.size()));
    for (std::size_t i = 0; i < f.size(); ++i) v[static_cast<Eigen::Index>(i)] = f.values[i];
    return v;
}

Field from_eigen(const grid::GridSpec& g, const EVec& v) {
    Field f = Field::zeros(g);
    for (std::size_t i = 0; i < f.size(); ++i) f.values[i] = v[static_cast<Eigen::Index>(i)];
    return f;
}

std::vector<std::size_t> strides_of(const grid::GridSpec& g) {
    const int d = g.dim();
    std::vector<std::size_t> s(d, 1);
    for (int a = d - 2; a >= 0; --a) s[a] = s[a + 1] * g.counts()[a + 1];
    return s;
}

// Real inner product of the 2n-dimensional real representation.
double rdot(const EVec& a, const EVec& b) { return a.dot(b).real(); }
double rnorm(const EVec& a) { return std::sqrt(std::max(0.0, rdot(a, a))); }

}  // namespace

const char* to_string(Method m) noexcept {
    switch (m) {
        case Method::newton: return "newton";
        case Method::picard: return "picard";
        default: return "hybrid";
    }
}

ResolventProblem::ResolventProblem(Field F, double tau_, nonlin::AbsorptionParams p,
                                   grid::PotentialSpec V)
    : rhs(std::move(F)), tau(tau_), params(p), potential(std::move(V)) {
    if (!(tau > 0.0)) throw std::invalid_argument("ResolventProblem: tau must be positive");
    if (potential.v1.size() != rhs.size() || potential.v2.size() != rhs.size())
        throw std::invalid_argument("ResolventProblem: potential does not match the grid");
}

struct LinearPart::Impl {
    grid::GridSpec spec;
    double tau;
    ESparse matrix;
    Eigen::SparseLU<ESparse> lu;

    Impl(const grid::GridSpec& g, double tau_, const grid::PotentialSpec& V)
        : spec(g), tau(tau_), matrix(static_cast<Eigen::Index>(g.size()),
                                     static_cast<Eigen::Index>(g.size())) {
        const Complex mitau(0.0, -tau);  // -i tau
        const auto st = strides_of(g);
        const std::size_t n = g.size();
        std::vector<Eigen::Triplet<Complex>> trip;
        trip.reserve(n * (2 * g.dim() + 1));
        for (std::size_t idx = 0; idx < n; ++idx) {
            Complex diag = Complex(1.0, 0.0) + mitau * (V.v1[idx] + V.v2[idx]);
            for (int a = 0; a < g.dim(); ++a) {
                const double inv_h2 = 1.0 / (g.spacing()[a] * g.spacing()[a]);
                const std::size_t s = st[a];
                const std::size_t cnt = g.counts()[a];
                const std::size_t c = (idx / s) % cnt;
                diag += mitau * (-2.0 * inv_h2);
                if (c > 0)
                    trip.emplace_back(static_cast<int>(idx), static_cast<int>(idx - s),
                                      mitau * inv_h2);
                if (c + 1 < cnt)
                    trip.emplace_back(static_cast<int>(idx), static_cast<int>(idx + s),
                                      mitau * inv_h2);
            }
            trip.emplace_back(static_cast<int>(idx), static_cast<int>(idx), diag);
        }
        matrix.setFromTriplets(trip.begin(), trip.end());
        matrix.makeCompressed();
        lu.analyzePattern(matrix);
        lu.factorize(matrix);
        if (lu.info() != Eigen::Success)
            throw std::runtime_error("LinearPart: factorization of the shifted Laplacian failed");
    }
};

LinearPart::LinearPart(const grid::GridSpec& g, double tau, const grid::PotentialSpec& V)
    : impl_(std::make_unique<Impl>(g, tau, V)) {}
LinearPart::~LinearPart() = default;
LinearPart::LinearPart(LinearPart&&) noexcept = default;
LinearPart& LinearPart::operator=(LinearPart&&) noexcept = default;

const grid::GridSpec& LinearPart::spec() const { return impl_->spec; }
double LinearPart::tau() const { return impl_->tau; }

Field LinearPart::apply(const Field& u) const {
    EVec v = impl_->matrix * to_eigen(u);
    return from_eigen(impl_->spec, v);
}

Field LinearPart::solve(const Field& b, double tol) const {
    const double sqw = std::sqrt(impl_->spec.cell_volume());
    const EVec rhs = to_eigen(b);
    EVec x = impl_->lu.solve(rhs);
    // iterative refinement with residual-based stopping
    for (int k = 0; k < 4; ++k) {
        EVec r = rhs - impl_->matrix * x;
        if (r.norm() * sqw <= tol) break;
        x += impl_->lu.solve(r);
    }
    return from_eigen(impl_->spec, x);
}

Field residual(const ResolventProblem& prob, const Field& u) {
    const double m = prob.params.m.value();
    const Complex a = prob.params.a.a;
    const Complex mitau(0.0, -prob.tau);
    Field lap = grid::laplacian(u);
    Field vu = grid::apply_potential(u, prob.potential);
    Field out = u;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const Complex gz = nonlin::g_eps(u.values[i], m, prob.params.epsilon);
        out.values[i] += mitau * (lap.values[i] + vu.values[i] + a * gz) - prob.rhs.values[i];
    }
    return out;
}

namespace {

struct GmresOutcome {
    EVec x;
    double residual = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Right-preconditioned GMRES over the real 2n-dimensional representation;
// op and prec must be real-linear. Deterministic; no restart (sizes are small).
template <class Op, class Prec>
GmresOutcome gmres(const Op& op, const Prec& prec, const EVec& b, double tol_euclid,
                   int max_iter) {
    GmresOutcome out;
    const Eigen::Index n = b.size();
    out.x = EVec::Zero(n);
    const double beta = rnorm(b);
    out.residual = beta;
    if (beta <= tol_euclid) {
        out.converged = true;
        return out;
    }
    const int m = std::min<int>(max_iter, static_cast<int>(2 * n));
    std::vector<EVec> basis;
    basis.reserve(m + 1);
    basis.push_back(b / beta);
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(m + 1, m);
    std::vector<double> cs(m, 0.0), sn(m, 0.0);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(m + 1);
    g[0] = beta;
    int j = 0;
    for (; j < m; ++j) {
        EVec w = op(prec(basis[j]));
        for (int i = 0; i <= j; ++i) {
            h(i, j) = rdot(basis[i], w);
            w -= h(i, j) * basis[i];
        }
        const double hnext = rnorm(w);  // subdiagonal entry before the rotation update
        h(j + 1, j) = hnext;
        for (int i = 0; i < j; ++i) {
            const double t = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
            h(i + 1, j) = -sn[i] * h(i, j) + cs[i] * h(i + 1, j);
            h(i, j) = t;
        }
        const double denom = std::hypot(h(j, j), h(j + 1, j));
        if (denom == 0.0) break;
        cs[j] = h(j, j) / denom;
        sn[j] = h(j + 1, j) / denom;
        h(j, j) = denom;
        h(j + 1, j) = 0.0;
        g[j + 1] = -sn[j] * g[j];
        g[j] = cs[j] * g[j];
        out.residual = std::abs(g[j + 1]);
        if (out.residual <= tol_euclid || hnext == 0.0) {
            ++j;
            break;
        }
        basis.push_back(w / hnext);
    }
    const int k = std::min(j, m);
    out.iterations = k;
    if (k == 0) return out;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(k);
    for (int i = k - 1; i >= 0; --i) {
        double s = g[i];
        for (int l = i + 1; l < k; ++l) s -= h(i, l) * y[l];
        y[i] = s / h(i, i);
    }
    EVec z = EVec::Zero(n);
    for (int i = 0; i < k; ++i) z += y[i] * basis[i];
    out.x = prec(z);
    out.converged = out.residual <= tol_euclid;
    return out;
}

struct WorkState {
    const ResolventProblem& prob;
    const LinearPart& lin;
    double sqw;      // sqrt(cell volume): converts Euclidean to weighted L2 norms
    EVec rhs;        // F
    double rhs_l2;   // ||F|| weighted

    explicit WorkState(const ResolventProblem& p, const LinearPart& l)
        : prob(p), lin(l), sqw(std::sqrt(p.rhs.spec.cell_volume())), rhs(to_eigen(p.rhs)),
          rhs_l2(grid::norm_l2(p.rhs)) {}

    EVec residual_vec(const EVec& u) const {
        const double m = prob.params.m.value();
        const double eps = prob.params.epsilon;
        const Complex a = prob.params.a.a;
        const Complex mitau(0.0, -prob.tau);
        EVec r = lin.impl()->matrix * u - rhs;
        for (Eigen::Index i = 0; i < u.size(); ++i)
            r[i] += mitau * a * nonlin::g_eps(u[i], m, eps);
        return r;
    }

    double weighted(const EVec& v) const { return rnorm(v) * sqw; }
};

struct LoopOutcome {
    EVec u;
    double res = 0.0;
    int iterations = 0;
    bool converged = false;
};

LoopOutcome newton_loop(const WorkState& w, EVec u, double tol, int max_iter) {
    LoopOutcome out;
    const double m = w.prob.params.m.value();
    const double eps = w.prob.params.epsilon;
    const Complex c = Complex(0.0, -w.prob.tau) * w.prob.params.a.a;  // -i tau a
    const Eigen::Index n = u.size();
    EVec r = w.residual_vec(u);
    double res = w.weighted(r);
    int it = 0;
    for (; it < max_iter && res > tol; ++it) {
        // pointwise linearization of g_eps at the current iterate
        Eigen::VectorXd phi(n), dphi(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double s = std::norm(u[i]) + eps;
            phi[i] = std::pow(s, -0.5 * (1.0 - m));
            dphi[i] = -0.5 * (1.0 - m) * std::pow(s, -0.5 * (1.0 - m) - 1.0);
        }
        auto apply_jac = [&](const EVec& d) -> EVec {
            EVec out_v = w.lin.impl()->matrix * d;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double proj = (u[i].real() * d[i].real() + u[i].imag() * d[i].imag());
                out_v[i] += c * (phi[i] * d[i] + 2.0 * dphi[i] * proj * u[i]);
            }
            return out_v;
        };
        auto precond = [&](const EVec& v) -> EVec { return w.lin.impl()->lu.solve(v); };
        const double lin_target = (tol / 10.0) / w.sqw;
        GmresOutcome lin = gmres(apply_jac, precond, EVec(-r), lin_target,
                                 std::min<int>(400, static_cast<int>(2 * n)));
        if (!lin.converged && lin.residual > 0.5 * rnorm(r)) break;  // ill-conditioned solve
        double lambda = 1.0;
        bool accepted = false;
        for (int h = 0; h < 30; ++h) {
            EVec trial = u + lambda * lin.x;
            EVec rt = w.residual_vec(trial);
            const double rest = w.weighted(rt);
            if (rest <= (1.0 - 1e-4 * lambda) * res || rest <= tol) {
                u = std::move(trial);
                r = std::move(rt);
                res = rest;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) break;
    }
    out.u = std::move(u);
    out.res = res;
    out.iterations = it;
    out.converged = res <= tol;
    return out;
}

LoopOutcome picard_loop(const WorkState& w, EVec u, double tol, int max_iter) {
    LoopOutcome out;
    const double m = w.prob.params.m.value();
    const double eps = w.prob.params.epsilon;
    const Complex itau_a = Complex(0.0, w.prob.tau) * w.prob.params.a.a;  // +i tau a
    const Eigen::Index n = u.size();
    double res = w.weighted(w.residual_vec(u));
    double omega = 1.0;
    EVec best = u;
    double best_res = res;
    int it = 0;
    for (; it < max_iter && res > tol; ++it) {
        EVec b = w.rhs;
        for (Eigen::Index i = 0; i < n; ++i) b[i] += itau_a * nonlin::g_eps(u[i], m, eps);
        EVec v = w.lin.impl()->lu.solve(b);
        bool accepted = false;
        while (omega >= 1.0 / 4096.0) {
            EVec trial = (1.0 - omega) * u + omega * v;
            const double rest = w.weighted(w.residual_vec(trial));
            if (rest < res * (1.0 - 1e-12) || rest <= tol) {
                u = std::move(trial);
                res = rest;
                omega = std::min(1.0, omega * 1.25);
                accepted = true;
                break;
            }
            omega *= 0.5;
        }
        if (!accepted) break;
        if (res < best_res) {
            best = u;
            best_res = res;
        }
    }
    if (best_res < res) {
        u = best;
        res = best_res;
    }
    out.u = std::move(u);
    out.res = res;
    out.iterations = it;
    out.converged = res <= tol;
    return out;
}

}  // namespace

SolveResult resolvent_solve(const ResolventProblem& prob, const SolveOptions& opts,
                            const Field* warm_start, const LinearPart* cache) {
    if (!(opts.tol > 0.0)) throw std::invalid_argument("resolvent_solve: tol must be positive");
    if (opts.force == SolveOptions::Force::newton_only && prob.params.epsilon == 0.0)
        throw std::invalid_argument("resolvent_solve: Newton requires epsilon > 0");
    if (warm_start && !(warm_start->spec == prob.rhs.spec))
        throw std::invalid_argument("resolvent_solve: warm start grid mismatch");
    if (cache && (cache->tau() != prob.tau || !(cache->spec() == prob.rhs.spec)))
        throw std::invalid_argument("resolvent_solve: cached linear part does not match");

    std::unique_ptr<LinearPart> own;
    if (!cache) {
        own = std::make_unique<LinearPart>(prob.rhs.spec, prob.tau, prob.potential);
        cache = own.get();
    }
    WorkState w(prob, *cache);
    EVec u0 = warm_start ? to_eigen(*warm_start)
                         : EVec::Zero(static_cast<Eigen::Index>(prob.rhs.size()));

    const bool try_newton = opts.force != SolveOptions::Force::picard_only &&
                            prob.params.epsilon > 0.0;
    LoopOutcome newton;
    bool newton_attempted = false;
    if (try_newton) {
        newton_attempted = true;
        newton = newton_loop(w, u0, opts.tol, opts.max_iter);
        if (newton.converged) {
            Field u = from_eigen(prob.rhs.spec, newton.u);
            SolveReport rep{newton.iterations, grid::norm_l2(residual(prob, u)), Method::newton,
                            grid::norm_l2(u) <= w.rhs_l2 * (1.0 + 1e-10)};
            return {std::move(u), rep};
        }
        if (opts.force == SolveOptions::Force::newton_only)
            throw NonConvergence("resolvent_solve: Newton did not converge", newton.res,
                                 newton.iterations);
    }

    EVec start = u0;
    if (newton_attempted && newton.res < w.weighted(w.residual_vec(u0))) start = newton.u;
    LoopOutcome pic = picard_loop(w, std::move(start), opts.tol, opts.max_iter);
    if (!pic.converged)
        throw NonConvergence("resolvent_solve: iteration budget exhausted",
                             std::min(pic.res, newton_attempted ? newton.res : pic.res),
                             pic.iterations + newton.iterations);
    Field u = from_eigen(prob.rhs.spec, pic.u);
    const Method method = newton_attempted ? Method::hybrid : Method::picard;
    SolveReport rep{pic.iterations + newton.iterations, grid::norm_l2(residual(prob, u)), method,
                    grid::norm_l2(u) <= w.rhs_l2 * (1.0 + 1e-10)};
    return {std::move(u), rep};
}

SolveResult resolvent_solve(const ResolventProblem& prob, double tol, int max_iter) {
    SolveOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    return resolvent_solve(prob, o);
}

Field dense_oracle_solve(const ResolventProblem& prob, double tol) {
    const grid::GridSpec& g = prob.rhs.spec;
    const std::size_t n = g.size();
    if (n > 64) throw std::invalid_argument("dense_oracle_solve: more than 64 nodes");
    const double m = prob.params.m.value();
    const double eps = prob.params.epsilon;
    const Complex a = prob.params.a.a;
    const Complex mitau(0.0, -prob.tau);
    const double sqw = std::sqrt(g.cell_volume());

    // dense linear part assembled from the stencil, independent of the sparse path
    Eigen::MatrixXcd lin = Eigen::MatrixXcd::Zero(n, n);
    const auto st = strides_of(g);
    for (std::size_t idx = 0; idx < n; ++idx) {
        Complex diag = Complex(1.0, 0.0) + mitau * (prob.potential.v1[idx] + prob.potential.v2[idx]);
        for (int ax = 0; ax < g.dim(); ++ax) {
            const double inv_h2 = 1.0 / (g.spacing()[ax] * g.spacing()[ax]);
            const std::size_t s = st[ax];
            const std::size_t cnt = g.counts()[ax];
            const std::size_t c = (idx / s) % cnt;
            diag += mitau * (-2.0 * inv_h2);
            if (c > 0) lin(idx, idx - s) += mitau * inv_h2;
            if (c + 1 < cnt) lin(idx, idx + s) += mitau * inv_h2;
        }
        lin(idx, idx) = diag;
    }
    const EVec F = to_eigen(prob.rhs);

    auto res_of = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        EVec u(n);
        for (std::size_t i = 0; i < n; ++i) u[i] = Complex(x[2 * i], x[2 * i + 1]);
        EVec r = lin * u - F;
        for (std::size_t i = 0; i < n; ++i) r[i] += mitau * a * nonlin::g_eps(u[i], m, eps);
        Eigen::VectorXd out(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            out[2 * i] = r[i].real();
            out[2 * i + 1] = r[i].imag();
        }
        return out;
    };

    Eigen::VectorXd x = Eigen::VectorXd::Zero(2 * n);
    Eigen::VectorXd r = res_of(x);
    double res = r.norm() * sqw;
    for (int it = 0; it < 200 && res > tol; ++it) {
        Eigen::MatrixXd jac(2 * n, 2 * n);
        for (std::size_t j = 0; j < 2 * n; ++j) {
            const double h = 1e-7 * std::max(1.0, std::abs(x[j]));
            Eigen::VectorXd xp = x, xm = x;
            xp[j] += h;
            xm[j] -= h;
            jac.col(j) = (res_of(xp) - res_of(xm)) / (2.0 * h);
        }
        const Eigen::VectorXd step = jac.partialPivLu().solve(-r);
        double lambda = 1.0;
        bool accepted = false;
        for (int hcnt = 0; hcnt < 40; ++hcnt) {
            Eigen::VectorXd trial = x + lambda * step;
            Eigen::VectorXd rt = res_of(trial);
            const double rest = rt.norm() * sqw;
            if (rest <= (1.0 - 1e-4 * lambda) * res || rest <= tol) {
                x = std::move(trial);
                r = std::move(rt);
                res = rest;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!accepted) throw NonConvergence("dense_oracle_solve: line search stalled", res, it);
    }
    if (res > tol) throw NonConvergence("dense_oracle_solve: iteration budget exhausted", res, 200);
    Field out = Field::zeros(g);
    for (std::size_t i = 0; i < n; ++i) out.values[i] = Complex(x[2 * i], x[2 * i + 1]);
    return out;
}

ContinuationResult eps_continuation(const ResolventProblem& prob,
                                    const std::vector<double>& schedule, double tol,
                                    int max_iter) {
    if (schedule.empty()) throw std::invalid_argument("eps_continuation: empty schedule");
    if (!(schedule.front() > 0.0))
        throw std::invalid_argument("eps_continuation: schedule must start above 0");
    for (std::size_t i = 1; i < schedule.size(); ++i)
        if (!(schedule[i] < schedule[i - 1]))
            throw std::invalid_argument("eps_continuation: schedule must be strictly decreasing");
    if (!(schedule.back() >= 0.0))
        throw std::invalid_argument("eps_continuation: epsilons must be nonnegative");

    LinearPart cache(prob.rhs.spec, prob.tau, prob.potential);
    ContinuationResult out{Field::zeros(prob.rhs.spec), {}};
    Field prev = Field::zeros(prob.rhs.spec);
    bool have_prev = false;
    for (std::size_t stage = 0; stage < schedule.size(); ++stage) {
        nonlin::AbsorptionParams p(prob.params.m, prob.params.a.a, schedule[stage]);
        ResolventProblem staged(prob.rhs, prob.tau, p, prob.potential);
        SolveOptions opts;
        opts.tol = tol;
        opts.max_iter = max_iter;
        SolveResult r;
        try {
            r = resolvent_solve(staged, opts, have_prev ? &prev : nullptr, &cache);
        } catch (const NonConvergence& e) {
            throw NonConvergence("eps_continuation: stage " + std::to_string(stage) + ": " +
                                     e.what(),
                                 e.best_residual, e.iterations);
        }
        ContinuationStage s;
        s.epsilon = schedule[stage];
        s.report = r.report;
        s.increment = have_prev ? grid::norm_l2(grid::subtract(r.u, prev)) : 0.0;
        out.stages.push_back(s);
        prev = r.u;
        have_prev = true;
    }
    out.u = std::move(prev);
    return out;
}

}  // namespace dnls::stationary
