#ifndef HOLOPATCH_NEWTON_HPP
#define HOLOPATCH_NEWTON_HPP

#include <functional>
#include <vector>

#include "holopatch/core.hpp"

namespace holopatch {

// ----------------------------------------------------------------------------
// Quantitative surjectivity over Banach spaces E (iterates) and F (residuals):
// given a derivative solve with |u|_E <= C |g|_F, iterate
//     h_{k+1} = h_k + derivative_solve(h_k, g - Phi(h_k)).
// Targets with |g - Phi(p)| < r/(2C) are guaranteed; anything farther is
// attempted with a no-guarantee flag. Divergence is declared when the residual
// fails to halve over five consecutive iterations.
// ----------------------------------------------------------------------------

enum class DerivativeMode { newton, frozen_at_center };

template <class VecE, class VecF = VecE>
struct OperatorProblem {
    std::function<VecF(const VecE&)> evaluate;
    /// Solve Phi'(base) u = rhs with a bound |u|_E <= C |rhs|_F.
    std::function<VecE(const VecE& base, const VecF& rhs)> derivative_solve;
    std::function<VecF(const VecF&, const VecF&)> subtract_f;  // a - b
    std::function<VecE(const VecE&, const VecE&)> add_e;       // a + b
    std::function<double(const VecE&)> norm_e;
    std::function<double(const VecF&)> norm_f;
    VecE center;
    double radius = 0.0;
    double bound_c = 0.0;  // the constant C
};

template <class VecE>
struct SurjectiveSolveResult {
    VecE solution;
    std::vector<double> residual_log;
    int iterations = 0;
    bool guaranteed = false;  // target inside the r/(2C) ball
    bool converged = false;
    double step_norm_total = 0.0;  // upper bound on |h - p|_E
};

template <class VecE, class VecF>
SurjectiveSolveResult<VecE> solve_surjective(const OperatorProblem<VecE, VecF>& prob,
                                             const VecF& target, double tol, int max_iters,
                                             DerivativeMode mode = DerivativeMode::newton) {
    require(prob.radius > 0.0 && prob.bound_c > 0.0, "solve_surjective: radius and C must be > 0");
    SurjectiveSolveResult<VecE> out;
    VecE h = prob.center;
    double res = prob.norm_f(prob.subtract_f(target, prob.evaluate(h)));
    out.guaranteed = res < prob.radius / (2.0 * prob.bound_c);
    out.residual_log.push_back(res);

    int stall = 0;
    double stall_ref = res;
    for (int it = 0; it < max_iters; ++it) {
        if (res <= tol) break;
        VecF rhs = prob.subtract_f(target, prob.evaluate(h));
        const VecE& base = (mode == DerivativeMode::frozen_at_center) ? prob.center : h;
        VecE u = prob.derivative_solve(base, rhs);
        double bound = prob.bound_c * prob.norm_f(rhs);
        require(prob.norm_e(u) <= bound * (1.0 + 1e-9) + 1e-300,
                "solve_surjective: derivative_solve bound violated at runtime");
        out.step_norm_total += prob.norm_e(u);
        h = prob.add_e(h, u);
        res = prob.norm_f(prob.subtract_f(target, prob.evaluate(h)));
        out.residual_log.push_back(res);
        out.iterations = it + 1;

        // Divergence heuristic: inside the guaranteed ball the decrease is
        // geometric, so five iterations without halving signal a broken contract.
        if (res <= 0.5 * stall_ref) {
            stall = 0;
            stall_ref = res;
        } else if (++stall >= 5) {
            throw std::runtime_error("solve_surjective: residual failed to halve over 5 iterations");
        }
    }
    out.converged = res <= tol;
    out.solution = h;
    return out;
}

/// Complex-scalar convenience wrapper used by tests and the CLI.
inline OperatorProblem<cplx> scalar_problem(std::function<cplx(cplx)> phi,
                                            std::function<cplx(cplx, cplx)> dsolve, cplx center,
                                            double radius, double c) {
    OperatorProblem<cplx> p;
    p.evaluate = std::move(phi);
    p.derivative_solve = std::move(dsolve);
    p.subtract_f = [](const cplx& a, const cplx& b) { return a - b; };
    p.add_e = [](const cplx& a, const cplx& b) { return a + b; };
    p.norm_e = [](const cplx& a) { return std::abs(a); };
    p.norm_f = [](const cplx& a) { return std::abs(a); };
    p.center = center;
    p.radius = radius;
    p.bound_c = c;
    return p;
}

}  // namespace holopatch

#endif
