#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sadic/common.hpp"

namespace sadic {

// ============================================================================
// Fields
// ============================================================================

enum class FieldKind { rationals, imaginary_quadratic };

/**
 * Field descriptor: the rationals, or an imaginary quadratic field Q(sqrt(-d))
 * with d in {1,2,3,7,11} — exactly the class-number-one fields that are also
 * norm-Euclidean, so S-integer rings are PIDs with a working Euclidean gcd.
 *
 * Elements are coordinates over the integral basis {1, w}:
 *   -d = 2,3 mod 4 : w = sqrt(-d),       w^2 = -d,            disc = -4d
 *   -d = 1 mod 4   : w = (1+sqrt(-d))/2, w^2 = w - (1+d)/4,   disc = -d
 */
class NumberField {
public:
    static NumberField rationals() { return NumberField(FieldKind::rationals, 0); }

    static NumberField imaginary_quadratic(int d) {
        if (d != 1 && d != 2 && d != 3 && d != 7 && d != 11)
            throw ValidationError("NumberField: unsupported d (need 1, 2, 3, 7 or 11)");
        return NumberField(FieldKind::imaginary_quadratic, d);
    }

    /// Parses the serialized field label: "Q", "Q(i)" or "Q(sqrt-d)".
    static NumberField from_label(const std::string& label) {
        if (label == "Q") return rationals();
        if (label == "Q(i)") return imaginary_quadratic(1);
        if (label.rfind("Q(sqrt-", 0) == 0 && label.back() == ')') {
            const std::string digits = label.substr(7, label.size() - 8);
            if (!digits.empty() && digits.find_first_not_of("0123456789") == std::string::npos)
                return imaginary_quadratic(std::stoi(digits));
        }
        throw ValidationError("NumberField: unrecognized field label '" + label + "'");
    }

    [[nodiscard]] FieldKind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_rationals() const noexcept { return kind_ == FieldKind::rationals; }
    [[nodiscard]] int d() const noexcept { return d_; }
    [[nodiscard]] int degree() const noexcept { return kind_ == FieldKind::rationals ? 1 : 2; }
    [[nodiscard]] int complex_places() const noexcept { return kind_ == FieldKind::rationals ? 0 : 1; }

    [[nodiscard]] Int discriminant() const {
        if (kind_ == FieldKind::rationals) return Int(1);
        return (-d_ % 4 == -3 || -d_ % 4 == 1) ? Int(-d_) : Int(-4 * d_);
    }

    /// Trace coefficient t in w^2 = t*w + n0.
    [[nodiscard]] int omega_trace() const noexcept {
        return (kind_ == FieldKind::imaginary_quadratic && d_ % 4 == 3) ? 1 : 0;
    }

    /// Constant coefficient n0 in w^2 = t*w + n0.
    [[nodiscard]] Int omega_sq_const() const {
        if (kind_ == FieldKind::rationals) return Int(0);
        return omega_trace() == 1 ? Int(-(1 + d_) / 4) : Int(-d_);
    }

    [[nodiscard]] std::string label() const {
        if (kind_ == FieldKind::rationals) return "Q";
        if (d_ == 1) return "Q(i)";
        return "Q(sqrt-" + std::to_string(d_) + ")";
    }

    bool operator==(const NumberField& o) const noexcept { return kind_ == o.kind_ && d_ == o.d_; }
    bool operator!=(const NumberField& o) const noexcept { return !(*this == o); }

private:
    NumberField(FieldKind kind, int d) : kind_(kind), d_(d) {}

    FieldKind kind_;
    int d_;
};

/// Every supported field, for exhaustive test sweeps.
inline std::vector<NumberField> all_supported_fields() {
    return {NumberField::rationals(),          NumberField::imaginary_quadratic(1),
            NumberField::imaginary_quadratic(2), NumberField::imaginary_quadratic(3),
            NumberField::imaginary_quadratic(7), NumberField::imaginary_quadratic(11)};
}

// ============================================================================
// Field elements
// ============================================================================

/**
 * Exact field element x = a + b*w over the integral basis; b = 0 over Q.
 * Immutable value semantics; all ring operations are exact.
 */
class KElem {
public:
    KElem(NumberField F, Rat a, Rat b) : F_(F), a_(std::move(a)), b_(std::move(b)) {
        if (F_.is_rationals() && b_ != 0)
            throw ValidationError("KElem: nonzero w-coordinate over Q");
    }
    KElem(NumberField F, Rat a) : KElem(F, std::move(a), Rat(0)) {}

    static KElem zero(NumberField F) { return KElem(F, Rat(0)); }
    static KElem one(NumberField F) { return KElem(F, Rat(1)); }
    static KElem omega(NumberField F) { return KElem(F, Rat(0), Rat(1)); }

    [[nodiscard]] const NumberField& field() const noexcept { return F_; }
    [[nodiscard]] const Rat& a() const noexcept { return a_; }
    [[nodiscard]] const Rat& b() const noexcept { return b_; }

    [[nodiscard]] bool is_zero() const noexcept { return a_ == 0 && b_ == 0; }
    [[nodiscard]] bool is_integral() const noexcept { return rat_is_integer(a_) && rat_is_integer(b_); }
    [[nodiscard]] bool is_rational() const noexcept { return b_ == 0; }

    KElem operator+(const KElem& o) const {
        check_field(o);
        return KElem(F_, a_ + o.a_, b_ + o.b_);
    }

    KElem operator-(const KElem& o) const {
        check_field(o);
        return KElem(F_, a_ - o.a_, b_ - o.b_);
    }

    KElem operator-() const { return KElem(F_, -a_, -b_); }

    KElem operator*(const KElem& o) const {
        check_field(o);
        if (F_.is_rationals()) return KElem(F_, a_ * o.a_);
        // (a1 + b1 w)(a2 + b2 w) with w^2 = t w + n0.
        const Rat t(F_.omega_trace());
        const Rat n0(F_.omega_sq_const());
        return KElem(F_, a_ * o.a_ + n0 * b_ * o.b_, a_ * o.b_ + b_ * o.a_ + t * b_ * o.b_);
    }

    KElem operator*(const Rat& r) const { return KElem(F_, a_ * r, b_ * r); }

    /// Galois conjugate: a + b*w  ->  a + b*(t - w).
    [[nodiscard]] KElem conj() const {
        if (F_.is_rationals()) return *this;
        const Rat t(F_.omega_trace());
        return KElem(F_, a_ + t * b_, -b_);
    }

    /// Field norm N(x) = x * conj(x); a rational, positive for x != 0.
    [[nodiscard]] Rat norm() const {
        if (F_.is_rationals()) return a_ * a_;
        const Rat t(F_.omega_trace());
        const Rat n0(F_.omega_sq_const());
        return a_ * a_ + t * a_ * b_ - n0 * b_ * b_;
    }

    [[nodiscard]] KElem inverse() const {
        if (is_zero()) throw ValidationError("KElem: inverse of zero");
        const Rat n = norm();
        KElem c = conj();
        return KElem(F_, c.a_ / n, c.b_ / n);
    }

    KElem operator/(const KElem& o) const { return *this * o.inverse(); }

    /// Image under the fixed complex embedding sigma(sqrt(-d)) = +i*sqrt(d).
    [[nodiscard]] std::complex<double> embed() const {
        if (F_.is_rationals()) return {to_double(a_), 0.0};
        const double sd = std::sqrt(static_cast<double>(F_.d()));
        const std::complex<double> w = F_.omega_trace() == 1
                                           ? std::complex<double>(0.5, sd / 2.0)
                                           : std::complex<double>(0.0, sd);
        return std::complex<double>(to_double(a_), 0.0) + std::complex<double>(to_double(b_), 0.0) * w;
    }

    bool operator==(const KElem& o) const { return F_ == o.F_ && a_ == o.a_ && b_ == o.b_; }
    bool operator!=(const KElem& o) const { return !(*this == o); }

    /// Canonical total order (a, then b) used for deterministic enumeration.
    bool operator<(const KElem& o) const { return a_ != o.a_ ? a_ < o.a_ : b_ < o.b_; }

    [[nodiscard]] std::string to_string() const {
        std::ostringstream os;
        if (F_.is_rationals() || b_ == 0) {
            os << a_;
        } else {
            os << a_ << (b_ < 0 ? "-" : "+") << rat_abs(b_) << "w";
        }
        return os.str();
    }

private:
    void check_field(const KElem& o) const {
        if (F_ != o.F_) throw ValidationError("KElem: mixed-field arithmetic");
    }

    NumberField F_;
    Rat a_, b_;
};

inline KElem operator*(const Rat& r, const KElem& x) { return x * r; }

/// Unit group of the ring of integers (finite for every supported field).
inline std::vector<KElem> unit_group(const NumberField& F) {
    std::vector<KElem> u{KElem::one(F), -KElem::one(F)};
    if (F.kind() == FieldKind::imaginary_quadratic && F.d() == 1) {
        u.push_back(KElem::omega(F));   // i
        u.push_back(-KElem::omega(F));  // -i
    } else if (F.kind() == FieldKind::imaginary_quadratic && F.d() == 3) {
        const KElem w = KElem::omega(F);  // primitive sixth root of unity
        u.push_back(w);
        u.push_back(-w);
        u.push_back(w - KElem::one(F));
        u.push_back(KElem::one(F) - w);
    }
    return u;
}

// ============================================================================
// Places
// ============================================================================

enum class PlaceKind { real, complex, finite };

/**
 * A place of the field: the single archimedean one (real for Q, complex for
 * the quadratics), or a finite place over a rational prime p with uniformizer
 * pi, ramification index e and residue degree f.
 *
 * Local degree d_v = 1 (real), 2 (complex), e*f (finite). The normalized
 * absolute value |.|_v (local-degree power of ||.||_v) takes values p^{f Z}
 * at finite places: |pi|_v = p^{-f}, |p|_v = p^{-e f}.
 */
struct Place {
    PlaceKind kind;
    NumberField F;
    Int p;        // finite places only
    KElem pi;     // finite places only; uniformizer
    int e = 1;
    int f = 1;
    int d_v = 1;
    int index_over_p = 0;  // distinguishes the two places of a split prime

    static Place archimedean(const NumberField& F) {
        Place v{F.is_rationals() ? PlaceKind::real : PlaceKind::complex,
                F, Int(0), KElem::zero(F)};
        v.d_v = F.is_rationals() ? 1 : 2;
        return v;
    }

    [[nodiscard]] bool is_archimedean() const noexcept { return kind != PlaceKind::finite; }

    /// Stable identity string: "inf", "p7", or "p5#0" / "p5#1" for split pairs.
    [[nodiscard]] std::string key() const {
        if (is_archimedean()) return "inf";
        std::string k = "p" + p.str();
        if (index_over_p >= 0 && split_pair_) k += "#" + std::to_string(index_over_p);
        return k;
    }

    bool operator==(const Place& o) const {
        if (kind != o.kind || F != o.F) return false;
        if (is_archimedean()) return true;
        return p == o.p && pi == o.pi;
    }

    bool split_pair_ = false;  // true when the rational prime splits
};

namespace detail {

/// Smallest-(b, then a >= 0 preferred) integral element of norm exactly p.
/// Exists whenever p ramifies or splits in the quadratic field F.
inline std::optional<KElem> element_of_norm(const NumberField& F, const Int& p) {
    const int t = F.omega_trace();
    const Int d(F.d());
    // N(a + b w) = (a + t b/2)^2 + (4d - t^2 d ... ) — handled per case below.
    const long bmax = t == 0 ? static_cast<long>(std::floor(std::sqrt(to_double(p) / to_double(d)) + 1))
                             : static_cast<long>(std::floor(std::sqrt(4.0 * to_double(p) / to_double(d)) + 1));
    for (long b = 0; b <= bmax; ++b) {
        std::vector<Int> candidates;
        if (t == 0) {
            const Int rem = p - d * b * b;
            if (rem < 0) break;
            const Int a = boost::multiprecision::sqrt(rem);
            if (a * a == rem) {
                candidates.push_back(a);
                if (a != 0) candidates.push_back(-a);
            }
        } else {
            // a^2 + a b + b^2 (1+d)/4 = p  =>  (2a + b)^2 = 4p - d b^2.
            const Int disc = 4 * p - d * b * b;
            if (disc < 0) break;
            const Int r = boost::multiprecision::sqrt(disc);
            if (r * r == disc) {
                for (const Int& s : {r, Int(-r)}) {
                    const Int twoa = s - b;
                    if (twoa % 2 == 0) candidates.push_back(twoa / 2);
                }
            }
        }
        std::sort(candidates.begin(), candidates.end(), [](const Int& x, const Int& y) {
            const Int ax = x < 0 ? -x : x, ay = y < 0 ? -y : y;
            return ax != ay ? ax < ay : x > y;  // prefer small magnitude, then positive
        });
        for (const Int& a : candidates)
            return KElem(F, Rat(a), Rat(b));
    }
    return std::nullopt;
}

}  // namespace detail

/// All finite places of K over the rational prime p, with deterministic order.
inline std::vector<Place> places_over(const NumberField& F, const Int& p) {
    if (!is_prime(p)) throw ValidationError("places_over: p must be a rational prime");
    if (F.is_rationals()) {
        Place v{PlaceKind::finite, F, p, KElem(F, Rat(p))};
        v.e = v.f = 1;
        v.d_v = 1;
        return {v};
    }
    const int sym = kronecker(F.discriminant(), p);
    if (sym == 0) {
        // Ramified: the prime ideal above p is principal with generator of norm p.
        auto pi = detail::element_of_norm(F, p);
        if (!pi) throw InvariantError("places_over: no norm-p generator at ramified prime");
        Place v{PlaceKind::finite, F, p, *pi};
        v.e = 2;
        v.f = 1;
        v.d_v = 2;
        return {v};
    }
    if (sym == 1) {
        auto pi0 = detail::element_of_norm(F, p);
        if (!pi0) throw InvariantError("places_over: no norm-p generator at split prime");
        Place v0{PlaceKind::finite, F, p, *pi0};
        v0.e = v0.f = 1;
        v0.d_v = 1;
        v0.index_over_p = 0;
        v0.split_pair_ = true;
        Place v1 = v0;
        v1.pi = pi0->conj();
        v1.index_over_p = 1;
        return {v0, v1};
    }
    // Inert: p stays prime, residue degree 2.
    Place v{PlaceKind::finite, F, p, KElem(F, Rat(p))};
    v.e = 1;
    v.f = 2;
    v.d_v = 2;
    return {v};
}

// ============================================================================
// Valuations and absolute values
// ============================================================================

/// pi-adic valuation of a nonzero x at a finite place; exact.
inline long valuation(const KElem& x, const Place& v) {
    if (v.is_archimedean()) throw ValidationError("valuation: archimedean place");
    if (x.is_zero()) throw ValidationError("valuation: zero element");
    if (v.F.is_rationals()) return val_p(x.a(), v.p);

    // Clear denominators: x = z / m with z integral, m a positive integer.
    const Int m = boost::multiprecision::lcm(den(x.a()), den(x.b()));
    KElem z = x * Rat(m);
    // v_pi(m) = e * v_p(m) since p = (unit) * pi^e at this place.
    long vm = m == 1 ? 0 : static_cast<long>(v.e) * val_p(m, v.p);

    // Count exact divisions of z by pi: z/pi = z * conj(pi) / N(pi).
    const Int npi = Int(num(v.pi.norm()));  // p^f
    long count = 0;
    while (true) {
        KElem w = z * v.pi.conj();
        if (rat_is_integer(w.a() / Rat(npi)) && rat_is_integer(w.b() / Rat(npi))) {
            z = KElem(v.F, w.a() / Rat(npi), w.b() / Rat(npi));
            ++count;
        } else {
            break;
        }
    }
    return count - vm;
}

/// Normalized absolute value |x|_v as an exact rational.
/// Real place: |x| (field is Q). Complex place: N(x) (the squared modulus).
/// Finite place: p^(-f * v_pi(x)). Zero maps to 0 at every place.
inline Rat abs_exact(const KElem& x, const Place& v) {
    if (x.is_zero()) return Rat(0);
    switch (v.kind) {
        case PlaceKind::real:
            return rat_abs(x.a());
        case PlaceKind::complex:
            return x.norm();
        case PlaceKind::finite: {
            const long w = valuation(x, v);
            return rat_pow(Rat(v.p), -static_cast<long>(v.f) * w);
        }
    }
    throw ValidationError("abs_exact: bad place");
}

/// Normalized absolute value |x|_v as a double.
inline double abs_value(const KElem& x, const Place& v) { return to_double(abs_exact(x, v)); }

/// Un-normalized ||x||_v = |x|_v^(1/d_v).
inline double norm_v(const KElem& x, const Place& v) {
    const double a = abs_value(x, v);
    return v.d_v == 1 ? a : std::pow(a, 1.0 / v.d_v);
}

/// |log prod_v |x|_v| over all places where the factor differs from 1,
/// plus the archimedean place. The product is computed exactly; a nonzero
/// return value means the product formula failed.
inline double check_product_formula(const KElem& x) {
    if (x.is_zero()) throw ValidationError("check_product_formula: zero element");
    Rat prod = x.field().is_rationals() ? rat_abs(x.a()) : x.norm();
    const Rat n = x.field().is_rationals() ? x.a() : x.norm();
    auto primes_of = [](const Int& k) { return k == 1 || k == -1 ? std::map<Int, long>{} : factorize(k); };
    std::map<Int, long> ps = primes_of(num(n));
    for (auto& [p, e] : primes_of(den(n))) ps[p] += e;
    for (auto& [p, e] : ps) {
        (void)e;
        for (const Place& v : places_over(x.field(), p)) prod *= abs_exact(x, v);
    }
    return prod == 1 ? 0.0 : std::abs(std::log(to_double(prod)));
}

/// Field constant (2/pi)^s * sqrt(|D_K|); exactly 1 over Q.
inline double field_constant(const NumberField& F) {
    if (F.is_rationals()) return 1.0;
    const double pi = 3.14159265358979323846;
    return (2.0 / pi) * std::sqrt(std::abs(to_double(F.discriminant())));
}

// ============================================================================
// Content of K-rational vectors
// ============================================================================

/// Square of the content c(x) = prod_{v in S} ||x||_{v,2} of a K-rational
/// vector, where ||.||_{v,2} is the Euclidean norm (real v), the squared
/// Hermitian norm (complex v), and the coordinate max of |.|_v (finite v).
/// Exact: squaring removes the one square root (the real-place factor).
inline Rat content_squared_exact(const std::vector<KElem>& x, const std::vector<Place>& S) {
    bool all_zero = true;
    for (const KElem& c : x) all_zero = all_zero && c.is_zero();
    if (all_zero) return Rat(0);
    Rat sq(1);
    for (const Place& v : S) {
        if (v.kind == PlaceKind::real) {
            Rat s(0);
            for (const KElem& c : x) s += c.a() * c.a();
            sq *= s;
        } else if (v.kind == PlaceKind::complex) {
            Rat s(0);
            for (const KElem& c : x) s += c.norm();
            sq *= s * s;
        } else {
            Rat mx(0);
            for (const KElem& c : x)
                if (!c.is_zero()) mx = std::max(mx, abs_exact(c, v));
            sq *= mx * mx;
        }
    }
    return sq;
}

inline double content_k_vector(const std::vector<KElem>& x, const std::vector<Place>& S) {
    return std::sqrt(to_double(content_squared_exact(x, S)));
}

// ============================================================================
// Euclidean gcd in the ring of integers (valid for every supported field)
// ============================================================================

/// Nearest-integer rounding of each coordinate; the Euclidean division step.
inline KElem round_coords(const KElem& x) {
    return KElem(x.field(), Rat(rat_round(x.a())), Rat(rat_round(x.b())));
}

/// gcd of integral elements; result is defined up to units, canonicalized to
/// the unit multiple that is least in the coordinate order with a > 0 first.
inline KElem ok_gcd(KElem z, KElem w) {
    if (!z.is_integral() || !w.is_integral()) throw ValidationError("ok_gcd: inputs must be integral");
    while (!w.is_zero()) {
        const KElem q = round_coords(z / w);
        const KElem r = z - q * w;
        z = w;
        w = r;
    }
    if (z.is_zero()) return z;
    KElem best = z;
    for (const KElem& u : unit_group(z.field())) {
        const KElem cand = z * u;
        const bool better = (cand.a() > 0 && best.a() <= 0) ||
                            ((cand.a() > 0) == (best.a() > 0) && cand < best);
        if (better) best = cand;
    }
    return best;
}

}  // namespace sadic
