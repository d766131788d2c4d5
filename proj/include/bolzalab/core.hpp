#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace bolza {

using complexd = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;
inline constexpr double two_pi = 2.0 * pi;

// Exit-code families used by the CLI: 2 invariant-fail, 3 config, 4 budget.
enum class ErrorKind { invariant = 2, config = 3, budget = 4 };

class Error : public std::runtime_error {
  public:
    Error(ErrorKind kind, std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), kind_(kind), name_(std::move(name)) {}
    ErrorKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    int exit_code() const { return static_cast<int>(kind_); }

  private:
    ErrorKind kind_;
    std::string name_;
};

#define BOLZA_ERROR(NAME, KIND)                                                   \
    struct NAME : Error {                                                         \
        explicit NAME(const std::string& what) : Error(ErrorKind::KIND, #NAME, what) {} \
    }

BOLZA_ERROR(ConstructionError, invariant);
BOLZA_ERROR(IterationCap, invariant);
BOLZA_ERROR(QuadratureNotConverged, invariant);
BOLZA_ERROR(DegreeError, config);
BOLZA_ERROR(NotHyperbolic, config);
BOLZA_ERROR(ConfigError, config);
BOLZA_ERROR(BudgetExceeded, budget);
BOLZA_ERROR(RankDeficientCensus, budget);
BOLZA_ERROR(IllConditioned, budget);
BOLZA_ERROR(VarianceBudget, budget);
BOLZA_ERROR(ExtrapolationUnstable, budget);

#undef BOLZA_ERROR

// Compensated accumulator.  Reductions over Monte-Carlo batches always run in
// batch-index order with this, so results do not depend on the thread count.
struct KahanSum {
    double s = 0.0;
    double c = 0.0;
    void add(double x) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    double value() const { return s; }
};

struct KahanSumC {
    KahanSum re, im;
    void add(complexd x) {
        re.add(x.real());
        im.add(x.imag());
    }
    complexd value() const { return {re.value(), im.value()}; }
};

// Fixed 17-significant-digit rendering; all CSV/JSON numeric payloads go
// through this so identical configs give byte-identical outputs.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline double sq(double x) { return x * x; }

}  // namespace bolza
