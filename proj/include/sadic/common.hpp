#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>

namespace sadic {

using Int = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

// ============================================================================
// Pinned numeric policy
// ============================================================================

/// Comparison tolerance for archimedean (floating-point) quantities.
inline constexpr double tau_arch = 1e-9;

/// Rank-decision tolerance on normalized sample matrices.
inline constexpr double tau_rank = 1e-8;

/// Maximum admissible product-formula deviation for exact field elements.
inline constexpr double product_formula_tol = 1e-12;

/// Default relative precision (base-p digits) of finite-place approximations.
inline constexpr int padic_default_prec = 64;

/// Operations refuse to return finite-place results carrying fewer digits.
inline constexpr int padic_min_sig_digits = 8;

/// Default cardinality cap for exhaustive enumerations.
inline constexpr std::int64_t default_enum_cap = 10'000'000;

// ============================================================================
// Error taxonomy (mapped to process exit codes by the CLI)
// ============================================================================

/// Bad configuration or contract violation by the caller. Exit code 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Enumeration cardinality cap exceeded. Exit code 3.
struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Finite-place precision insufficient to decide a predicate. Exit code 3.
struct PrecisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An internal invariant failed; carries evidence text. Exit code 4.
/// The flagship case is an exhaustive-search falsification event, which is
/// never expected and always reported loudly.
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// An exhaustive search failed to produce a witness whose existence the
/// implemented theorem guarantees; carries the instance description. Never
/// expected on valid inputs. Exit code 4.
struct FalsificationError : InvariantError {
    using InvariantError::InvariantError;
};

// ============================================================================
// Exact rational helpers
// ============================================================================

[[nodiscard]] inline Int num(const Rat& q) { return boost::multiprecision::numerator(q); }
[[nodiscard]] inline Int den(const Rat& q) { return boost::multiprecision::denominator(q); }

[[nodiscard]] inline Rat rat_abs(const Rat& q) { return q < 0 ? Rat(-q) : q; }

[[nodiscard]] inline double to_double(const Rat& q) { return q.convert_to<double>(); }
[[nodiscard]] inline double to_double(const Int& n) { return n.convert_to<double>(); }

/// Exact dyadic rational equal to the given finite double.
[[nodiscard]] inline Rat rat_from_double(double x) {
    if (!std::isfinite(x)) throw ValidationError("rat_from_double: non-finite input");
    if (x == 0.0) return Rat(0);
    int exp = 0;
    double m = std::frexp(x, &exp);          // x = m * 2^exp, |m| in [1/2, 1)
    Int mant = Int(std::ldexp(m, 53));       // integral by construction
    exp -= 53;
    Rat r(mant);
    if (exp >= 0) {
        r *= Rat(Int(1) << exp);
    } else {
        r /= Rat(Int(1) << -exp);
    }
    return r;
}

/// q^e with integer (possibly negative) exponent; exact.
[[nodiscard]] inline Rat rat_pow(const Rat& q, long e) {
    if (e == 0) return Rat(1);
    if (q == 0) {
        if (e < 0) throw ValidationError("rat_pow: zero base with negative exponent");
        return Rat(0);
    }
    Rat base = e > 0 ? q : Rat(1) / q;
    unsigned long k = static_cast<unsigned long>(e > 0 ? e : -e);
    Rat acc(1);
    while (k) {
        if (k & 1UL) acc *= base;
        base *= base;
        k >>= 1UL;
    }
    return acc;
}

[[nodiscard]] inline Int int_pow(const Int& b, unsigned long e) {
    Int acc(1), base = b;
    while (e) {
        if (e & 1UL) acc *= base;
        base *= base;
        e >>= 1UL;
    }
    return acc;
}

/// Largest integer <= q.
[[nodiscard]] inline Int rat_floor(const Rat& q) {
    Int n = num(q), d = den(q);
    Int quo = n / d;                         // truncates toward zero
    if (n < 0 && quo * d != n) --quo;
    return quo;
}

/// Smallest integer >= q.
[[nodiscard]] inline Int rat_ceil(const Rat& q) { return -rat_floor(-q); }

/// Nearest integer; half-way cases round toward +infinity (deterministic).
[[nodiscard]] inline Int rat_round(const Rat& q) { return rat_floor(q + Rat(1, 2)); }

[[nodiscard]] inline bool rat_is_integer(const Rat& q) { return den(q) == 1; }

/// p-adic valuation of a nonzero integer.
[[nodiscard]] inline long val_p(Int n, const Int& p) {
    if (n == 0) throw ValidationError("val_p: zero has no finite valuation");
    long v = 0;
    while (n % p == 0) {
        n /= p;
        ++v;
    }
    return v;
}

/// p-adic valuation of a nonzero rational.
[[nodiscard]] inline long val_p(const Rat& q, const Int& p) {
    if (q == 0) throw ValidationError("val_p: zero has no finite valuation");
    return val_p(num(q), p) - val_p(den(q), p);
}

// ============================================================================
// Small prime utilities (operands stay desk-scale; trial division suffices)
// ============================================================================

[[nodiscard]] inline bool is_prime(const Int& n) {
    if (n < 2) return false;
    if (n < 4) return true;
    if (n % 2 == 0) return false;
    for (Int d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

/// Prime factorization of |n|, n != 0, by trial division.
[[nodiscard]] inline std::map<Int, long> factorize(Int n) {
    if (n == 0) throw ValidationError("factorize: zero");
    if (n < 0) n = -n;
    std::map<Int, long> out;
    for (Int p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        while (n % p == 0) {
            ++out[p];
            n /= p;
        }
    }
    if (n > 1) ++out[n];
    return out;
}

/// b^e mod m, m > 1.
[[nodiscard]] inline Int pow_mod(Int b, Int e, const Int& m) {
    Int acc(1);
    b %= m;
    if (b < 0) b += m;
    while (e > 0) {
        if (e % 2 == 1) acc = acc * b % m;
        b = b * b % m;
        e /= 2;
    }
    return acc;
}

/// Kronecker symbol (a|n) for odd prime n, plus the n=2 extension.
[[nodiscard]] inline int kronecker(Int a, const Int& n) {
    if (n == 2) {
        a %= 8;
        if (a < 0) a += 8;
        if (a % 2 == 0) return 0;
        return (a == 1 || a == 7) ? 1 : -1;
    }
    // Odd prime: Euler's criterion.
    a %= n;
    if (a < 0) a += n;
    if (a == 0) return 0;
    Int r = pow_mod(a, (n - 1) / 2, n);
    return r == 1 ? 1 : -1;
}

}  // namespace sadic
