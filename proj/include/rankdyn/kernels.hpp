#pragma once

#include <cmath>
#include <string>
#include <string_view>

namespace rankdyn {

/// Compactly supported second-order kernels on [-1, 1].
enum class KernelKind { Epanechnikov, Biweight };

KernelKind parse_kernel(std::string_view name);
std::string to_string(KernelKind kind);

struct KernelSpec {
  KernelKind kind = KernelKind::Epanechnikov;
  static constexpr double support = 1.0;
};

struct KernelMoments {
  double sigma2_K;
  double sigma2_Hprime;
};

/// K(x).
template <typename Scalar>
inline Scalar kernel_eval(KernelKind kind, Scalar x) {
  if (!(std::abs(x) <= Scalar(1))) return Scalar(0);
  const Scalar s = Scalar(1) - x * x;
  switch (kind) {
    case KernelKind::Epanechnikov:
      return Scalar(0.75) * s;
    case KernelKind::Biweight:
      return Scalar(15) / Scalar(16) * s * s;
  }
  return Scalar(0);
}

/// H(x) = integral of K over (-inf, x]; the exact antiderivative, so H' = K.
template <typename Scalar>
inline Scalar integrated_kernel_eval(KernelKind kind, Scalar x) {
  if (x <= Scalar(-1)) return Scalar(0);
  if (x >= Scalar(1)) return Scalar(1);
  const Scalar x2 = x * x;
  switch (kind) {
    case KernelKind::Epanechnikov:
      return Scalar(0.5) + Scalar(0.75) * x * (Scalar(1) - x2 / Scalar(3));
    case KernelKind::Biweight:
      return Scalar(0.5) + Scalar(15) / Scalar(16) * x *
                               (Scalar(1) - Scalar(2) / Scalar(3) * x2 + x2 * x2 / Scalar(5));
  }
  return Scalar(0);
}

/// K'(x); zero outside the open support (-1, 1), including at the kinks.
template <typename Scalar>
inline Scalar kernel_deriv_eval(KernelKind kind, Scalar x) {
  if (!(std::abs(x) < Scalar(1))) return Scalar(0);
  switch (kind) {
    case KernelKind::Epanechnikov:
      return Scalar(-1.5) * x;
    case KernelKind::Biweight:
      return Scalar(-15) / Scalar(4) * x * (Scalar(1) - x * x);
  }
  return Scalar(0);
}

template <typename Scalar>
inline Scalar kernel_eval(const KernelSpec& spec, Scalar x) {
  return kernel_eval(spec.kind, x);
}
template <typename Scalar>
inline Scalar integrated_kernel_eval(const KernelSpec& spec, Scalar x) {
  return integrated_kernel_eval(spec.kind, x);
}
template <typename Scalar>
inline Scalar kernel_deriv_eval(const KernelSpec& spec, Scalar x) {
  return kernel_deriv_eval(spec.kind, x);
}

/// Second moments of K and H'. Equal because H' = K.
KernelMoments kernel_moments(const KernelSpec& spec);

}  // namespace rankdyn
