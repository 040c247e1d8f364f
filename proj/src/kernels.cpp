#include "rankdyn/kernels.hpp"

#include <algorithm>
#include <cctype>

#include "rankdyn/errors.hpp"

namespace rankdyn {

KernelKind parse_kernel(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "epanechnikov") return KernelKind::Epanechnikov;
  if (lower == "biweight") return KernelKind::Biweight;
  throw DomainError("unknown kernel '" + std::string(name) +
                    "' (expected epanechnikov or biweight)");
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::Epanechnikov:
      return "epanechnikov";
    case KernelKind::Biweight:
      return "biweight";
  }
  return "unknown";
}

KernelMoments kernel_moments(const KernelSpec& spec) {
  double s2 = 0.0;
  switch (spec.kind) {
    case KernelKind::Epanechnikov:
      s2 = 0.2;
      break;
    case KernelKind::Biweight:
      s2 = 1.0 / 7.0;
      break;
  }
  return {s2, s2};
}

}  // namespace rankdyn
