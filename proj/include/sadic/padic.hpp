#pragma once

#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

#include "sadic/common.hpp"
#include "sadic/number_field.hpp"

namespace sadic {

/// Inverse of a mod p^k for a coprime to p (via Euler's theorem).
inline Int modinv_prime_power(const Int& a, const Int& p, long k) {
    const Int m = int_pow(p, static_cast<unsigned long>(k));
    const Int phi = m / p * (p - 1);
    Int r = pow_mod(a, phi - 1, m);
    if (r < 0) r += m;
    return r;
}

/**
 * Truncated element of Q_p: x = p^val * unit with the unit known modulo p^prec
 * (prec "significant digits"), or an explicit zero. Only completions K_v that
 * equal Q_p are modeled (every finite place of Q; split places of the
 * quadratic fields); richer completions use exact field elements instead.
 *
 * Nonzero values always carry an exactly known valuation, so absolute-value
 * comparisons are exact. Addition whose cancellation leaves fewer than
 * padic_min_sig_digits significant digits raises PrecisionError rather than
 * silently degrading.
 */
class PadicApprox {
public:
    static PadicApprox zero(Int p, int prec = padic_default_prec) {
        PadicApprox x(std::move(p), prec);
        x.zero_ = true;
        return x;
    }

    PadicApprox(Int p, long val, Int unit, int prec = padic_default_prec) : PadicApprox(std::move(p), prec) {
        if (prec < 1) throw ValidationError("PadicApprox: precision must be >= 1");
        const Int m = int_pow(p_, static_cast<unsigned long>(prec));
        unit %= m;
        if (unit < 0) unit += m;
        if (unit == 0) throw ValidationError("PadicApprox: zero unit (use the explicit zero)");
        if (unit % p_ == 0) throw ValidationError("PadicApprox: unit must be coprime to p");
        val_ = val;
        unit_ = unit;
    }

    static PadicApprox from_rational(const Int& p, const Rat& q, int prec = padic_default_prec) {
        if (q == 0) return zero(p, prec);
        const long v = val_p(q, p);
        const Rat u = q * rat_pow(Rat(p), -v);
        const Int m = int_pow(p, static_cast<unsigned long>(prec));
        Int r = num(u) % m * modinv_prime_power(den(u), p, prec) % m;
        if (r < 0) r += m;
        return PadicApprox(p, v, r, prec);
    }

    [[nodiscard]] const Int& p() const noexcept { return p_; }
    [[nodiscard]] bool is_zero() const noexcept { return zero_; }
    [[nodiscard]] int prec() const noexcept { return prec_; }

    [[nodiscard]] long valuation() const {
        if (zero_) throw ValidationError("PadicApprox: zero has no finite valuation");
        return val_;
    }

    [[nodiscard]] const Int& unit() const {
        if (zero_) throw ValidationError("PadicApprox: zero has no unit part");
        return unit_;
    }

    /// |x|_p as an exact rational (the residue degree is 1 wherever Q_p models K_v).
    [[nodiscard]] Rat abs_exact() const { return zero_ ? Rat(0) : rat_pow(Rat(p_), -val_); }

    /// True iff |x|_p <= p^(-h); exact for every representable value.
    [[nodiscard]] bool abs_at_most(long h) const { return zero_ || val_ >= h; }

    /// The integer x mod p^h in [0, p^h); requires val >= 0 and enough digits.
    [[nodiscard]] Int residue(long h) const {
        if (h < 0) throw ValidationError("PadicApprox: negative residue depth");
        if (zero_) return Int(0);
        if (val_ < 0) throw ValidationError("PadicApprox: residue of a non-integral value");
        if (val_ >= h) return Int(0);
        if (val_ + prec_ < h)
            throw PrecisionError("PadicApprox: " + std::to_string(h) +
                                 " digits requested but only " + std::to_string(val_ + prec_) +
                                 " known");
        return int_pow(p_, static_cast<unsigned long>(val_)) * unit_ % int_pow(p_, static_cast<unsigned long>(h));
    }

    PadicApprox operator-() const {
        if (zero_) return *this;
        const Int m = int_pow(p_, static_cast<unsigned long>(prec_));
        return PadicApprox(p_, val_, m - unit_, prec_);
    }

    PadicApprox operator*(const PadicApprox& o) const {
        check_p(o);
        const int pr = std::min(prec_, o.prec_);
        if (zero_ || o.zero_) return zero(p_, pr);
        const Int m = int_pow(p_, static_cast<unsigned long>(pr));
        return PadicApprox(p_, val_ + o.val_, unit_ * o.unit_ % m, pr);
    }

    /// Multiplicative inverse at the same precision: p^(-val) * unit^(-1).
    [[nodiscard]] PadicApprox inverse() const {
        if (zero_) throw ValidationError("PadicApprox: inverse of zero");
        return PadicApprox(p_, -val_, modinv_prime_power(unit_, p_, prec_), prec_);
    }

    PadicApprox operator/(const PadicApprox& o) const { return *this * o.inverse(); }

    PadicApprox operator+(const PadicApprox& o) const {
        check_p(o);
        if (zero_) return o;
        if (o.zero_) return *this;
        // Work at the coarser absolute precision; detect cancellation exactly.
        const long vmin = std::min(val_, o.val_);
        const long abs_window = std::min(val_ + prec_, o.val_ + o.prec_);
        const long window = abs_window - vmin;  // digits available above p^vmin
        if (window < 1) throw PrecisionError("PadicApprox: no overlapping digits in addition");
        const Int m = int_pow(p_, static_cast<unsigned long>(window));
        Int b = (unit_ * int_pow(p_, static_cast<unsigned long>(val_ - vmin)) +
                 o.unit_ * int_pow(p_, static_cast<unsigned long>(o.val_ - vmin))) %
                m;
        if (b == 0)
            throw PrecisionError("PadicApprox: addition cancels below the precision window");
        const long s = val_p(b, p_);
        if (window - s < padic_min_sig_digits)
            throw PrecisionError("PadicApprox: fewer than " +
                                 std::to_string(padic_min_sig_digits) +
                                 " significant digits after cancellation");
        return PadicApprox(p_, vmin + s, b / int_pow(p_, static_cast<unsigned long>(s)),
                           static_cast<int>(window - s));
    }

    PadicApprox operator-(const PadicApprox& o) const { return *this + (-o); }

    bool operator==(const PadicApprox& o) const {
        if (p_ != o.p_) return false;
        if (zero_ || o.zero_) return zero_ == o.zero_;
        return val_ == o.val_ && prec_ == o.prec_ && unit_ == o.unit_;
    }

    /// Base-p digits of the unit, least significant first (serialization form).
    [[nodiscard]] std::string unit_digits() const {
        if (zero_) return "";
        std::string out;
        Int u = unit_;
        for (int i = 0; i < prec_; ++i) {
            const Int d = u % p_;
            out += d.str();
            if (i + 1 < prec_) out += ".";
            u /= p_;
        }
        return out;
    }

    static PadicApprox from_unit_digits(const Int& p, long val, const std::string& digits, int prec) {
        Int u(0), scale(1);
        std::istringstream is(digits);
        std::string tok;
        int count = 0;
        while (std::getline(is, tok, '.')) {
            u += Int(tok) * scale;
            scale *= p;
            ++count;
        }
        if (count != prec) throw ValidationError("PadicApprox: digit count does not match precision");
        return PadicApprox(p, val, u, prec);
    }

private:
    PadicApprox(Int p, int prec) : p_(std::move(p)), prec_(prec) {
        if (!is_prime(p_)) throw ValidationError("PadicApprox: p must be prime");
    }

    void check_p(const PadicApprox& o) const {
        if (p_ != o.p_) throw ValidationError("PadicApprox: mixed-prime arithmetic");
    }

    Int p_;
    bool zero_ = false;
    long val_ = 0;
    Int unit_ = 0;
    int prec_;
};

// ============================================================================
// Embedding K -> Q_p at places with K_v = Q_p
// ============================================================================

namespace detail {

/// Hensel-lifted root r of x^2 - t x - n0 mod p^window belonging to the place
/// v (the root with v_pi(omega - r) >= 1). Cached per (place, window).
inline Int hensel_omega_root(const Place& v, long window) {
    static std::mutex mu;
    static std::map<std::pair<std::string, long>, Int> cache;
    const std::string place_id = v.F.label() + "|" + v.key();
    {
        std::lock_guard<std::mutex> lk(mu);
        auto it = cache.find({place_id, window});
        if (it != cache.end()) return it->second;
    }
    const Int t(v.F.omega_trace()), n0 = v.F.omega_sq_const(), p = v.p;
    // Root selection mod p: omega = r (mod pi) for exactly one root r.
    std::optional<Int> r0;
    for (Int c = 0; c < p; ++c) {
        if ((c * c - t * c - n0) % p != 0) continue;
        if (valuation(KElem::omega(v.F) - KElem(v.F, Rat(c)), v) >= 1) {
            r0 = c;
            break;
        }
    }
    if (!r0) throw InvariantError("hensel_omega_root: no matching residue root (place not split?)");
    // Newton iteration; the derivative 2r - t is a unit because the two roots
    // are distinct mod p at a split prime.
    Int r = *r0;
    Int modulus = p;
    const Int target = int_pow(p, static_cast<unsigned long>(window));
    while (modulus < target) {
        modulus = std::min(Int(modulus * modulus), target);
        // One Newton step needs the inverse of m'(r) at the *new* modulus.
        Int deriv = (2 * r - t) % modulus;
        if (deriv < 0) deriv += modulus;
        const long k = val_p(modulus, p);
        const Int inv = modinv_prime_power(deriv, p, k);
        Int val = (r * r - t * r - n0) % modulus;
        r = (r - val * inv) % modulus;
        if (r < 0) r += modulus;
    }
    r %= target;
    if (r < 0) r += target;
    {
        std::lock_guard<std::mutex> lk(mu);
        cache[{place_id, window}] = r;
    }
    return r;
}

}  // namespace detail

/// Exact conversion of a field element into the completion at a place with
/// K_v = Q_p (e = f = 1). The result carries full requested precision: the
/// valuation comes from the exact place valuation, never from truncation.
inline PadicApprox to_padic(const KElem& x, const Place& v, int prec = padic_default_prec) {
    if (v.is_archimedean()) throw ValidationError("to_padic: archimedean place");
    if (v.e != 1 || v.f != 1)
        throw ValidationError("to_padic: completion at " + v.key() + " of " + v.F.label() +
                              " is a proper extension of Q_p; use exact field elements");
    if (x.is_zero()) return PadicApprox::zero(v.p, prec);
    if (v.F.is_rationals()) return PadicApprox::from_rational(v.p, x.a(), prec);

    const long vx = valuation(x, v);
    // Clear denominators: x = (A + B*omega)/M.
    const Int M = boost::multiprecision::lcm(den(x.a()), den(x.b()));
    const long c = M == 1 ? 0 : val_p(M, v.p);
    const long window = vx + c + prec;
    const Int r = detail::hensel_omega_root(v, window);
    const Int pw = int_pow(v.p, static_cast<unsigned long>(window));
    Int y = (num(x.a() * M) + num(x.b() * M) * r) % pw;
    if (y < 0) y += pw;
    if (y == 0 || val_p(y, v.p) != vx + c)
        throw InvariantError("to_padic: embedded valuation disagrees with the place valuation");
    const Int unit = y / int_pow(v.p, static_cast<unsigned long>(vx + c));
    // Account for the cleared M: divide by its p-part (unit part via inverse).
    const Int mu = M / int_pow(v.p, static_cast<unsigned long>(c));
    const Int pp = int_pow(v.p, static_cast<unsigned long>(prec));
    Int u = unit % pp * modinv_prime_power(mu, v.p, prec) % pp;
    if (u < 0) u += pp;
    return PadicApprox(v.p, vx, u, prec);
}

// ============================================================================
// Value-group helpers (|.|_v takes values in p^{f Z} at a finite place)
// ============================================================================

/// Exponent k with r = p^(f k), if r lies in the value group.
inline std::optional<long> value_group_exponent(const Rat& r, const Int& p, int f) {
    if (r <= 0) return std::nullopt;
    if (r == 1) return 0;
    const Int n = num(r), d = den(r);
    long k;
    if (d == 1) {
        const long v = val_p(n, p);
        if (int_pow(p, static_cast<unsigned long>(v)) != n) return std::nullopt;
        k = v;
    } else if (n == 1) {
        const long v = val_p(d, p);
        if (int_pow(p, static_cast<unsigned long>(v)) != d) return std::nullopt;
        k = -v;
    } else {
        return std::nullopt;
    }
    if (k % f != 0) return std::nullopt;
    return k / f;
}

/// Largest k with p^(f k) <= r, for r > 0 (snap-down to the value group).
inline long value_group_floor_exponent(const Rat& r, const Int& p, int f) {
    if (r <= 0) throw ValidationError("value_group_floor_exponent: bound must be positive");
    const Rat step = rat_pow(Rat(p), f);
    long k = 0;
    Rat cur(1);
    if (cur <= r) {
        while (cur * step <= r) {
            cur *= step;
            ++k;
        }
    } else {
        while (cur > r) {
            cur /= step;
            --k;
        }
    }
    return k;
}

}  // namespace sadic
