#ifndef CHESHIRE_ERRORS_HPP
#define CHESHIRE_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace cheshire {

/// Input amplitudes whose norm is not 1 within tolerance.
class NormalizationError : public std::invalid_argument {
 public:
  explicit NormalizationError(const std::string& what)
      : std::invalid_argument(what) {}
};

/// A quantity that has no defined value for the given inputs (zero overlap,
/// zero intensity, zero detection rate). The CLI maps these to exit code 3.
class UndefinedValueError : public std::domain_error {
 public:
  explicit UndefinedValueError(const std::string& what)
      : std::domain_error(what) {}
};

class UndefinedWeakValue : public UndefinedValueError {
 public:
  UndefinedWeakValue(std::complex<double> numerator,
                     std::complex<double> denominator)
      : UndefinedValueError("weak value undefined: post-selection overlap is zero"),
        numerator_(numerator),
        denominator_(denominator) {}

  std::complex<double> numerator() const noexcept { return numerator_; }
  std::complex<double> denominator() const noexcept { return denominator_; }

 private:
  std::complex<double> numerator_;
  std::complex<double> denominator_;
};

class UndefinedRatio : public UndefinedValueError {
 public:
  UndefinedRatio() : UndefinedValueError("ratio undefined: P_D + P_A is zero") {}
};

class UndefinedProfile : public UndefinedValueError {
 public:
  explicit UndefinedProfile(const std::string& what)
      : UndefinedValueError(what) {}
};

}  // namespace cheshire

#endif  // CHESHIRE_ERRORS_HPP
