#pragma once

#include <algorithm>
#include <complex>
#include <vector>

#include "sadic/common.hpp"
#include "sadic/number_field.hpp"
#include "sadic/padic.hpp"
#include "sadic/s_adic.hpp"

namespace sadic {
namespace detail {

// Promoted arithmetic on completion values at one place: operations stay exact
// while every operand is exact, and otherwise drop to the completion model of
// the place (double at real places, complex<double> at complex places,
// truncated p-adic at finite places).

[[nodiscard]] inline double lv_real(const LocalValue& x) {
    return x.is_exact() ? to_double(x.exact_part().a()) : x.real_part();
}

[[nodiscard]] inline std::complex<double> lv_complex(const LocalValue& x) {
    return x.is_exact() ? x.exact_part().embed() : x.complex_part();
}

[[nodiscard]] inline PadicApprox lv_padic(const Place& v, const LocalValue& x, int prec) {
    return x.is_exact() ? to_padic(x.exact_part(), v, prec) : x.padic_part();
}

/// Working precision of a mixed finite-place expression: the smallest digit
/// count among the truncated operands (exact operands impose no limit).
[[nodiscard]] inline int padic_prec_over(std::initializer_list<const LocalValue*> xs) {
    int prec = padic_default_prec;
    for (const LocalValue* x : xs)
        if (x->kind() == LocalValue::Kind::padic_value) prec = std::min(prec, x->padic_part().prec());
    return prec;
}

[[nodiscard]] inline LocalValue mul_local(const Place& v, const LocalValue& x, const LocalValue& y) {
    if (x.is_exact() && y.is_exact()) return LocalValue::exact(x.exact_part() * y.exact_part());
    switch (v.kind) {
        case PlaceKind::real:
            return LocalValue::real(lv_real(x) * lv_real(y));
        case PlaceKind::complex: {
            const std::complex<double> z = lv_complex(x) * lv_complex(y);
            return LocalValue::complex_value(z.real(), z.imag());
        }
        case PlaceKind::finite: {
            const int prec = padic_prec_over({&x, &y});
            return LocalValue::padic(lv_padic(v, x, prec) * lv_padic(v, y, prec));
        }
    }
    throw InvariantError("mul_local: unreachable place kind");
}

[[nodiscard]] inline LocalValue add_local(const Place& v, const LocalValue& x, const LocalValue& y) {
    if (x.is_exact() && y.is_exact()) return LocalValue::exact(x.exact_part() + y.exact_part());
    switch (v.kind) {
        case PlaceKind::real:
            return LocalValue::real(lv_real(x) + lv_real(y));
        case PlaceKind::complex: {
            const std::complex<double> z = lv_complex(x) + lv_complex(y);
            return LocalValue::complex_value(z.real(), z.imag());
        }
        case PlaceKind::finite: {
            const int prec = padic_prec_over({&x, &y});
            return LocalValue::padic(lv_padic(v, x, prec) + lv_padic(v, y, prec));
        }
    }
    throw InvariantError("add_local: unreachable place kind");
}

[[nodiscard]] inline LocalValue neg_local(const Place& v, const LocalValue& x) {
    if (x.is_exact()) return LocalValue::exact(-x.exact_part());
    switch (v.kind) {
        case PlaceKind::real:
            return LocalValue::real(-x.real_part());
        case PlaceKind::complex: {
            const std::complex<double> z = -x.complex_part();
            return LocalValue::complex_value(z.real(), z.imag());
        }
        case PlaceKind::finite:
            return LocalValue::padic(-x.padic_part());
    }
    throw InvariantError("neg_local: unreachable place kind");
}

[[nodiscard]] inline LocalValue inv_local(const Place& v, const LocalValue& x) {
    if (x.is_exact()) return LocalValue::exact(x.exact_part().inverse());
    switch (v.kind) {
        case PlaceKind::real: {
            const double r = x.real_part();
            if (r == 0.0) throw ValidationError("inv_local: zero entry");
            return LocalValue::real(1.0 / r);
        }
        case PlaceKind::complex: {
            const std::complex<double> z = x.complex_part();
            if (z == std::complex<double>{0.0, 0.0}) throw ValidationError("inv_local: zero entry");
            const std::complex<double> w = 1.0 / z;
            return LocalValue::complex_value(w.real(), w.imag());
        }
        case PlaceKind::finite:
            return LocalValue::padic(x.padic_part().inverse());
    }
    throw InvariantError("inv_local: unreachable place kind");
}

/// |x|_v as a double (normalized absolute value to the d_v power: plain
/// magnitude at real places, squared modulus at complex places, exact p-power
/// at finite places).
[[nodiscard]] inline double lv_abs(const Place& v, const LocalValue& x) {
    if (x.is_exact()) return to_double(abs_exact(x.exact_part(), v));
    switch (x.kind()) {
        case LocalValue::Kind::real_value:
            return std::abs(x.real_part());
        case LocalValue::Kind::complex_value:
            return std::norm(x.complex_part());
        case LocalValue::Kind::padic_value:
            return to_double(x.padic_part().abs_exact());
        case LocalValue::Kind::exact_value:
            break;  // handled above
    }
    throw InvariantError("lv_abs: unreachable value kind");
}

/// The norm whose per-place product is the content: Euclidean norm of the
/// magnitudes at a real place, their sum at a complex place (the coordinate
/// magnitudes are already squared moduli there), and their max at a finite
/// place.
[[nodiscard]] inline double place_norm2(const Place& v, const std::vector<double>& magnitudes) {
    switch (v.kind) {
        case PlaceKind::real: {
            double s = 0.0;
            for (double m : magnitudes) s += m * m;
            return std::sqrt(s);
        }
        case PlaceKind::complex: {
            double s = 0.0;
            for (double m : magnitudes) s += m;
            return s;
        }
        case PlaceKind::finite: {
            double s = 0.0;
            for (double m : magnitudes) s = std::max(s, m);
            return s;
        }
    }
    throw InvariantError("place_norm2: unreachable place kind");
}

}  // namespace detail
}  // namespace sadic
