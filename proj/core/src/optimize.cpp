#include "nlsv/optimize.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <cmath>
#include <memory>
#include <stdexcept>

namespace nlsv {

namespace {

constexpr double kPenalty = 1e100;

struct Context {
  const Objective* objective;
  std::size_t evaluations = 0;
  Eigen::VectorXd scratch;
};

double trampoline(const gsl_vector* v, void* params) {
  auto* ctx = static_cast<Context*>(params);
  for (Eigen::Index i = 0; i < ctx->scratch.size(); ++i) {
    ctx->scratch(i) = gsl_vector_get(v, static_cast<std::size_t>(i));
  }
  ++ctx->evaluations;
  const double value = (*ctx->objective)(ctx->scratch);
  return std::isfinite(value) ? value : kPenalty;
}

struct VectorDeleter {
  void operator()(gsl_vector* v) const { gsl_vector_free(v); }
};
struct MinimizerDeleter {
  void operator()(gsl_multimin_fminimizer* m) const { gsl_multimin_fminimizer_free(m); }
};

std::unique_ptr<gsl_vector, VectorDeleter> to_gsl(const Eigen::VectorXd& x) {
  std::unique_ptr<gsl_vector, VectorDeleter> v(gsl_vector_alloc(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    gsl_vector_set(v.get(), static_cast<std::size_t>(i), x(i));
  }
  return v;
}

}  // namespace

MinimizeResult nelder_mead(const Objective& objective, const Eigen::VectorXd& start,
                           const Eigen::VectorXd& step, const MinimizeOptions& options) {
  if (start.size() == 0 || start.size() != step.size()) {
    throw std::invalid_argument("nelder_mead: start and step must match and be non-empty");
  }
  gsl_set_error_handler_off();
  const auto n = static_cast<std::size_t>(start.size());
  Context ctx{&objective, 0, Eigen::VectorXd(start.size())};

  gsl_multimin_function fn;
  fn.n = n;
  fn.f = &trampoline;
  fn.params = &ctx;

  auto x0 = to_gsl(start);
  auto ss = to_gsl(step);
  std::unique_ptr<gsl_multimin_fminimizer, MinimizerDeleter> m(
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n));
  if (gsl_multimin_fminimizer_set(m.get(), &fn, x0.get(), ss.get()) != GSL_SUCCESS) {
    throw std::runtime_error("nelder_mead: failed to initialise simplex");
  }

  MinimizeResult out;
  int status = GSL_CONTINUE;
  while (status == GSL_CONTINUE && out.iterations < options.max_iterations) {
    ++out.iterations;
    if (gsl_multimin_fminimizer_iterate(m.get()) != GSL_SUCCESS) {
      out.message = "simplex iteration stalled";
      break;
    }
    status = gsl_multimin_test_size(gsl_multimin_fminimizer_size(m.get()),
                                    options.size_tolerance);
  }
  out.converged = status == GSL_SUCCESS;
  if (out.message.empty()) {
    out.message = out.converged ? "converged" : "iteration budget exhausted";
  }
  out.x.resize(start.size());
  for (std::size_t i = 0; i < n; ++i) out.x(static_cast<Eigen::Index>(i)) = gsl_vector_get(m->x, i);
  out.value = m->fval;
  out.evaluations = ctx.evaluations;
  return out;
}

}  // namespace nlsv
