#include "stochlab/warped_patch.hpp"

#include <cmath>
#include <sstream>

#include "stochlab/errors.hpp"

namespace stochlab {

namespace {

WarpedCheck evaluate(const WarpedPatch2D& patch, const std::function<double(double)>& f, double x, double s) {
  const double pm = patch.psi(x - s), p0 = patch.psi(x), pp = patch.psi(x + s);
  if (!(pm > 0.0 && p0 > 0.0 && pp > 0.0)) throw DomainError("warping function must be positive");
  const double fm = f(x - s), f0 = f(x), fp = f(x + s);

  WarpedCheck c;
  c.stencil = s;
  // (1/sqrt g) d_x (sqrt g X^x) with sqrt g = psi; the theta component of the lift vanishes.
  c.lhs = (pp * fp - pm * fm) / (2.0 * s) / p0;
  c.base_divergence = (fp - fm) / (2.0 * s);

  // Gamma^x_{theta theta} = -psi psi', so nabla_e e = -(psi'/psi) d_x for e = d_theta / psi,
  // and minus the trace gives +(psi'/psi) d_x.
  const double dpsi = (pp - pm) / (2.0 * s);
  const double nabla_ee = -dpsi / p0;
  const double as_defined = -nabla_ee;
  c.mean_curvature = patch.sign == MeanCurvatureSign::MinusTrace ? as_defined : -as_defined;
  const double coupling = patch.sign == MeanCurvatureSign::MinusTrace ? 1.0 : -1.0;
  c.rhs = c.base_divergence + coupling * f0 * c.mean_curvature;
  c.residual = std::abs(c.lhs - c.rhs);
  return c;
}

}  // namespace

WarpedCheck lemma1_warped_check(const WarpedPatch2D& patch, const std::function<double(double)>& f, double x,
                                double tolerance) {
  if (!patch.psi) throw PreconditionError("warping function missing");
  if (!(patch.stencil > 0.0)) throw PreconditionError("stencil must be positive");
  double s = patch.stencil;
  WarpedCheck c = evaluate(patch, f, x, s);
  for (int i = 0; i < 3 && !(c.residual <= tolerance); ++i) {
    s *= 0.5;
    c = evaluate(patch, f, x, s);
  }
  if (!(c.residual <= tolerance)) {
    std::ostringstream msg;
    msg << "warped divergence identity residual " << c.residual << " above " << tolerance << " at x = " << x;
    throw NumericError(msg.str());
  }
  return c;
}

}  // namespace stochlab
