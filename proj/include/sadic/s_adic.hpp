#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sadic/common.hpp"
#include "sadic/number_field.hpp"
#include "sadic/padic.hpp"

namespace sadic {

// ============================================================================
// S-configuration
// ============================================================================

/**
 * A finite set S of places of K containing the archimedean one, presented in
 * the canonical order: archimedean place first, then finite places by
 * ascending rational prime (split pairs in index order). Built from the field
 * plus the list of rational primes under the finite places.
 */
class SConfig {
public:
    SConfig(NumberField F, std::vector<Int> primes) : F_(F) {
        std::sort(primes.begin(), primes.end());
        for (size_t i = 0; i + 1 < primes.size(); ++i)
            if (primes[i] == primes[i + 1]) throw ValidationError("SConfig: duplicate prime");
        places_.push_back(Place::archimedean(F_));
        for (const Int& p : primes)
            for (const Place& v : places_over(F_, p)) places_.push_back(v);
        primes_ = std::move(primes);
    }

    [[nodiscard]] const NumberField& field() const noexcept { return F_; }
    [[nodiscard]] const std::vector<Place>& places() const noexcept { return places_; }
    [[nodiscard]] const std::vector<Int>& primes() const noexcept { return primes_; }
    [[nodiscard]] size_t size() const noexcept { return places_.size(); }
    [[nodiscard]] const Place& archimedean() const noexcept { return places_.front(); }

    [[nodiscard]] int n_real() const noexcept { return F_.is_rationals() ? 1 : 0; }
    [[nodiscard]] int n_complex() const noexcept { return F_.is_rationals() ? 0 : 1; }
    [[nodiscard]] int n_finite() const noexcept { return static_cast<int>(places_.size()) - 1; }

    [[nodiscard]] size_t place_index(const std::string& key) const {
        for (size_t i = 0; i < places_.size(); ++i)
            if (places_[i].key() == key) return i;
        throw ValidationError("SConfig: no place with key '" + key + "'");
    }

    /// Stable label, e.g. "Q(i)|2,5".
    [[nodiscard]] std::string label() const {
        std::string out = F_.label() + "|";
        for (size_t i = 0; i < primes_.size(); ++i) {
            if (i) out += ",";
            out += primes_[i].str();
        }
        return out;
    }

    bool operator==(const SConfig& o) const { return F_ == o.F_ && primes_ == o.primes_; }

private:
    NumberField F_;
    std::vector<Int> primes_;
    std::vector<Place> places_;
};

// ============================================================================
// Per-place values and adelic points
// ============================================================================

/**
 * One component of a K_S point: a double (real place), a complex double
 * (complex place), a truncated p-adic value (finite place with K_v = Q_p),
 * or an exact field element (valid at every place).
 */
class LocalValue {
public:
    enum class Kind { real_value, complex_value, padic_value, exact_value };

    static LocalValue real(double x) {
        LocalValue v(Kind::real_value);
        v.re_ = x;
        return v;
    }
    static LocalValue complex_value(double re, double im) {
        LocalValue v(Kind::complex_value);
        v.re_ = re;
        v.im_ = im;
        return v;
    }
    static LocalValue padic(PadicApprox x) {
        LocalValue v(Kind::padic_value);
        v.pad_ = std::move(x);
        return v;
    }
    static LocalValue exact(KElem x) {
        LocalValue v(Kind::exact_value);
        v.ex_ = std::move(x);
        return v;
    }

    [[nodiscard]] Kind kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_exact() const noexcept { return kind_ == Kind::exact_value; }

    [[nodiscard]] double real_part() const { return re_; }
    [[nodiscard]] std::complex<double> complex_part() const { return {re_, im_}; }

    [[nodiscard]] const PadicApprox& padic_part() const {
        if (!pad_) throw ValidationError("LocalValue: not a p-adic value");
        return *pad_;
    }
    [[nodiscard]] const KElem& exact_part() const {
        if (!ex_) throw ValidationError("LocalValue: not an exact value");
        return *ex_;
    }

    /// Checks that this component is usable at the given place.
    void validate_for(const Place& v) const {
        switch (kind_) {
            case Kind::real_value:
                if (v.kind != PlaceKind::real)
                    throw ValidationError("LocalValue: real component at a non-real place");
                return;
            case Kind::complex_value:
                if (v.kind != PlaceKind::complex)
                    throw ValidationError("LocalValue: complex component at a non-complex place");
                return;
            case Kind::padic_value:
                if (v.kind != PlaceKind::finite || v.e != 1 || v.f != 1)
                    throw ValidationError(
                        "LocalValue: p-adic digit values only model completions equal to Q_p; "
                        "use exact field elements at " + v.key());
                if (pad_->p() != v.p)
                    throw ValidationError("LocalValue: p-adic component with mismatched prime");
                return;
            case Kind::exact_value:
                if (ex_->field() != v.F)
                    throw ValidationError("LocalValue: exact component from the wrong field");
                return;
        }
    }

private:
    explicit LocalValue(Kind k) : kind_(k) {}

    Kind kind_;
    double re_ = 0.0, im_ = 0.0;
    std::optional<PadicApprox> pad_;
    std::optional<KElem> ex_;
};

/// A point of K_S: one component per place of the configuration.
class SAdelePoint {
public:
    SAdelePoint(SConfig cfg, std::vector<LocalValue> comps)
        : cfg_(std::move(cfg)), comps_(std::move(comps)) {
        if (comps_.size() != cfg_.size())
            throw ValidationError("SAdelePoint: need exactly one component per place");
        for (size_t i = 0; i < comps_.size(); ++i) comps_[i].validate_for(cfg_.places()[i]);
    }

    /// The diagonal embedding of an exact field element.
    static SAdelePoint diagonal(const SConfig& cfg, const KElem& x) {
        std::vector<LocalValue> comps(cfg.size(), LocalValue::exact(x));
        return SAdelePoint(cfg, std::move(comps));
    }

    [[nodiscard]] const SConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] const LocalValue& at(size_t place_idx) const { return comps_.at(place_idx); }

private:
    SConfig cfg_;
    std::vector<LocalValue> comps_;
};

// ============================================================================
// Canonical enumeration order
// ============================================================================

/// Ascending field norm; ties prefer the larger coordinate pair, so that +x
/// precedes -x (0, 1, -1, 2, -2, ... over Q). Fixed once so every search in
/// the library reports reproducible witnesses.
struct CanonicalLess {
    bool operator()(const KElem& u, const KElem& w) const {
        const Rat nu = u.norm(), nw = w.norm();
        if (nu != nw) return nu < nw;
        if (u.a() != w.a()) return u.a() > w.a();
        return u.b() > w.b();
    }

    bool operator()(const std::vector<KElem>& u, const std::vector<KElem>& w) const {
        for (size_t i = 0; i < std::min(u.size(), w.size()); ++i) {
            if ((*this)(u[i], w[i])) return true;
            if ((*this)(w[i], u[i])) return false;
        }
        return u.size() < w.size();
    }
};

// ============================================================================
// Adelic boxes
// ============================================================================

/**
 * Per-place, per-coordinate bounds r_{v,j} > 0 on the normalized absolute
 * value |x_j|_v, with finite-place bounds restricted to the value group
 * p^{f Z} (stored with their exponent). All bounds are exact rationals, so
 * box membership of field vectors is decided exactly.
 */
class SBox {
public:
    SBox(SConfig cfg, int n) : cfg_(std::move(cfg)), n_(n) {
        if (n < 1) throw ValidationError("SBox: need at least one coordinate");
        bounds_.assign(cfg_.size(), std::vector<std::optional<Rat>>(n));
        exps_.assign(cfg_.size(), std::vector<long>(n, 0));
    }

    [[nodiscard]] const SConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int n() const noexcept { return n_; }

    void set_bound(size_t place_idx, int j, const Rat& r) {
        const Place& v = place(place_idx);
        if (r <= 0) throw ValidationError("SBox: bounds must be positive");
        if (v.kind == PlaceKind::finite) {
            const auto k = value_group_exponent(r, v.p, v.f);
            if (!k)
                throw ValidationError("SBox: finite-place bound at " + v.key() +
                                      " must be a power of p^f");
            exps_[place_idx][check_coord(j)] = *k;
        }
        bounds_[place_idx][check_coord(j)] = r;
    }

    /// Finite-place bound given directly as the exponent: r = p^(f k).
    void set_finite_exponent(size_t place_idx, int j, long k) {
        const Place& v = place(place_idx);
        if (v.kind != PlaceKind::finite)
            throw ValidationError("SBox: exponent form only applies to finite places");
        bounds_[place_idx][check_coord(j)] = rat_pow(Rat(v.p), v.f * k);
        exps_[place_idx][j] = k;
    }

    /// Same bound for every coordinate at the given place.
    void set_uniform_bound(size_t place_idx, const Rat& r) {
        for (int j = 0; j < n_; ++j) set_bound(place_idx, j, r);
    }

    [[nodiscard]] const Rat& bound(size_t place_idx, int j) const {
        const auto& b = bounds_.at(place_idx).at(static_cast<size_t>(j));
        if (!b) throw ValidationError("SBox: bound not set at " + place(place_idx).key());
        return *b;
    }

    [[nodiscard]] long exponent(size_t place_idx, int j) const {
        if (place(place_idx).kind != PlaceKind::finite)
            throw ValidationError("SBox: exponent of an archimedean bound");
        (void)bound(place_idx, j);  // ensure it is set
        return exps_.at(place_idx).at(static_cast<size_t>(j));
    }

    [[nodiscard]] bool is_complete() const {
        for (const auto& row : bounds_)
            for (const auto& b : row)
                if (!b) return false;
        return true;
    }

    /// Exact membership test for a K-rational vector.
    [[nodiscard]] bool contains(const std::vector<KElem>& x) const {
        if (static_cast<int>(x.size()) != n_) throw ValidationError("SBox: dimension mismatch");
        for (size_t vi = 0; vi < cfg_.size(); ++vi)
            for (int j = 0; j < n_; ++j)
                if (abs_exact(x[j], cfg_.places()[vi]) > bound(vi, j)) return false;
        return true;
    }

private:
    const Place& place(size_t idx) const {
        if (idx >= cfg_.size()) throw ValidationError("SBox: place index out of range");
        return cfg_.places()[idx];
    }
    int check_coord(int j) const {
        if (j < 0 || j >= n_) throw ValidationError("SBox: coordinate out of range");
        return j;
    }

    SConfig cfg_;
    int n_;
    std::vector<std::vector<std::optional<Rat>>> bounds_;
    std::vector<std::vector<long>> exps_;
};

// ============================================================================
// S-integrality
// ============================================================================

/// True iff x lies in O_S: valuation >= 0 at every finite place outside S,
/// checked by factoring the coordinate denominators.
inline bool is_s_integer(const KElem& x, const SConfig& cfg) {
    if (x.field() != cfg.field()) throw ValidationError("is_s_integer: field mismatch");
    if (x.is_zero()) return true;
    const Int m = boost::multiprecision::lcm(den(x.a()), den(x.b()));
    if (m == 1) return true;
    for (const auto& [q, e] : factorize(m)) {
        (void)e;
        if (std::find(cfg.primes().begin(), cfg.primes().end(), q) != cfg.primes().end()) continue;
        for (const Place& v : places_over(cfg.field(), q))
            if (valuation(x, v) < 0) return false;
    }
    return true;
}

// ============================================================================
// Enumeration of O_S points in adelic boxes
// ============================================================================

namespace detail {

/// Visits all integral (a, b) with embed(a + b*w) in the closed complex disc
/// of squared radius R around center (double ranges padded; callers filter
/// exactly). Over Q it degenerates to b = 0 and an interval in a.
template <typename Visitor>
void scan_lattice_disc(const NumberField& F, std::complex<double> center, double R, Visitor&& visit) {
    if (R < 0) return;
    const double radius = std::sqrt(R);
    const double pad = 2.0 + 1e-9 * (std::abs(center) + radius);
    if (F.is_rationals()) {
        const long a_lo = static_cast<long>(std::floor(center.real() - radius - pad));
        const long a_hi = static_cast<long>(std::ceil(center.real() + radius + pad));
        for (long a = a_lo; a <= a_hi; ++a) visit(a, 0L);
        return;
    }
    const double t = F.omega_trace();
    const double wim = t == 1.0 ? std::sqrt(static_cast<double>(F.d())) / 2.0
                                : std::sqrt(static_cast<double>(F.d()));
    const long b_lo = static_cast<long>(std::floor((center.imag() - radius) / wim - pad));
    const long b_hi = static_cast<long>(std::ceil((center.imag() + radius) / wim + pad));
    for (long b = b_lo; b <= b_hi; ++b) {
        const double a_center = center.real() - t * b / 2.0;
        const long a_lo = static_cast<long>(std::floor(a_center - radius - pad));
        const long a_hi = static_cast<long>(std::ceil(a_center + radius + pad));
        for (long a = a_lo; a <= a_hi; ++a) visit(a, b);
    }
}

/// Conservative cardinality estimate for the disc scan above.
inline double disc_point_estimate(const NumberField& F, double R) {
    if (R < 0) return 0;
    if (F.is_rationals()) return 2 * std::sqrt(R) + 3;
    const double covol = F.omega_trace() == 1 ? std::sqrt(static_cast<double>(F.d())) / 2.0
                                              : std::sqrt(static_cast<double>(F.d()));
    const double pi = 3.14159265358979323846;
    return pi * R / covol + 6 * (std::sqrt(R) + 1);
}

}  // namespace detail

/// All x in O_S with |x|_v <= bound_{v,j} for every v in S, for one coordinate
/// j of the box; sorted in canonical order. Complete and duplicate-free.
inline std::vector<KElem> enumerate_box_coordinate(const SBox& box, int j,
                                                   std::uint64_t cap = default_enum_cap) {
    const SConfig& cfg = box.config();
    const NumberField& F = cfg.field();
    const std::vector<Place>& places = cfg.places();

    // Denominator D clearing every allowed negative valuation: at places over
    // p, |x|_v <= p^{f k} permits v_pi(x) >= -k, i.e. a denominator p^ceil(k/e).
    Int D(1);
    std::map<Int, long> clear;
    for (size_t vi = 1; vi < places.size(); ++vi) {
        const Place& v = places[vi];
        const long k = box.exponent(vi, j);
        const long need = k > 0 ? (k + v.e - 1) / v.e : 0;
        auto& c = clear[v.p];
        c = std::max(c, need);
    }
    for (const auto& [p, c] : clear) D *= int_pow(p, static_cast<unsigned long>(c));

    std::vector<KElem> out;
    const Rat r_arch = box.bound(0, j);

    if (F.is_rationals()) {
        // x = m / D with p^{-k} | m wherever k < 0.
        Int forced(1);
        for (size_t vi = 1; vi < places.size(); ++vi) {
            const long k = box.exponent(vi, j);
            if (k < 0) forced *= int_pow(places[vi].p, static_cast<unsigned long>(-k));
        }
        const Int M = rat_floor(r_arch * Rat(D));
        const Int steps = M < 0 ? Int(-1) : M / forced;
        const Int count = 2 * steps + 1;
        if (count > Int(cap))
            throw CapError("enumerate_box: " + count.str() + " points at coordinate " +
                           std::to_string(j) + " exceeds cap " + std::to_string(cap));
        out.push_back(KElem::zero(F));
        for (Int s = 1; s <= steps; ++s) {
            out.push_back(KElem(F, Rat(s * forced, D)));
            out.push_back(KElem(F, Rat(-s * forced, D)));
        }
        return out;  // generated in canonical order already
    }

    // Quadratic field: z = x * D runs over integral points of the norm disc.
    const Rat R = r_arch * Rat(D) * Rat(D);
    const double estimate = detail::disc_point_estimate(F, to_double(R));
    if (estimate > static_cast<double>(cap))
        throw CapError("enumerate_box: estimated " +
                       std::to_string(static_cast<unsigned long long>(estimate)) +
                       " points at coordinate " + std::to_string(j) + " exceeds cap " +
                       std::to_string(cap));
    detail::scan_lattice_disc(F, {0.0, 0.0}, to_double(R), [&](long a, long b) {
        const KElem z(F, Rat(a), Rat(b));
        if (z.norm() > R) return;  // exact disc membership
        if (!z.is_zero()) {
            for (size_t vi = 1; vi < places.size(); ++vi) {
                const Place& v = places[vi];
                const long k = box.exponent(vi, j);
                if (valuation(z, v) < v.e * clear[v.p] - k) return;
            }
        }
        out.push_back(KElem(F, Rat(a, D), Rat(b, D)));
    });
    if (out.size() > cap)
        throw CapError("enumerate_box: " + std::to_string(out.size()) + " points at coordinate " +
                       std::to_string(j) + " exceeds cap " + std::to_string(cap));
    std::sort(out.begin(), out.end(), CanonicalLess{});
    return out;
}

/// All vectors x in O_S^n inside the box, in canonical lexicographic order.
/// Refuses with the cardinality estimate when it would exceed the cap.
inline std::vector<std::vector<KElem>> enumerate_box(const SBox& box,
                                                     std::uint64_t cap = default_enum_cap) {
    if (!box.is_complete()) throw ValidationError("enumerate_box: box has unset bounds");
    const int n = box.n();
    std::vector<std::vector<KElem>> axes;
    double total = 1.0;
    for (int j = 0; j < n; ++j) {
        axes.push_back(enumerate_box_coordinate(box, j, cap));
        total *= static_cast<double>(axes.back().size());
    }
    if (total > static_cast<double>(cap))
        throw CapError("enumerate_box: " + std::to_string(static_cast<unsigned long long>(total)) +
                       " vectors exceeds cap " + std::to_string(cap));
    std::vector<std::vector<KElem>> out;
    out.reserve(static_cast<size_t>(total));
    std::vector<size_t> idx(static_cast<size_t>(n), 0);
    while (true) {
        std::vector<KElem> point;
        point.reserve(static_cast<size_t>(n));
        for (int j = 0; j < n; ++j) point.push_back(axes[static_cast<size_t>(j)][idx[static_cast<size_t>(j)]]);
        out.push_back(std::move(point));
        int j = n - 1;
        while (j >= 0 && ++idx[static_cast<size_t>(j)] == axes[static_cast<size_t>(j)].size()) {
            idx[static_cast<size_t>(j)] = 0;
            --j;
        }
        if (j < 0) break;
    }
    return out;
}

// ============================================================================
// Nearest S-integer (CRT / strong-approximation rounding)
// ============================================================================

namespace detail {

struct FinitePlaceTask {
    size_t place_idx;
    long k;              // bound = p^{f k}
    long depth;          // congruence depth h in pi-units (0 = no constraint)
    std::optional<KElem> exact_center;   // D * t when the target is exact
    std::optional<Int> residue_center;   // (D * t) mod p^depth when p-adic
};

}  // namespace detail

/**
 * Rounds an adelic target to a point of O_S: returns y with
 * |y - t_v|_v <= bound_v at every v in S, minimizing the residual content
 * (ties broken canonically), or nullopt after the exhaustive check of the
 * induced residue system intersected with the archimedean range.
 */
inline std::optional<KElem> nearest_s_integer(const SAdelePoint& targets,
                                              const std::vector<Rat>& bounds,
                                              std::uint64_t cap = default_enum_cap) {
    const SConfig& cfg = targets.config();
    const NumberField& F = cfg.field();
    const std::vector<Place>& places = cfg.places();
    if (bounds.size() != places.size())
        throw ValidationError("nearest_s_integer: need one bound per place");
    for (const Rat& b : bounds)
        if (b <= 0) throw ValidationError("nearest_s_integer: bounds must be positive");

    // --- Finite places: denominator and congruence system -------------------
    std::map<Int, long> clear;  // prime -> power in D
    std::vector<detail::FinitePlaceTask> tasks;
    for (size_t vi = 1; vi < places.size(); ++vi) {
        const Place& v = places[vi];
        const auto kopt = value_group_exponent(bounds[vi], v.p, v.f);
        if (!kopt)
            throw ValidationError("nearest_s_integer: finite bound at " + v.key() +
                                  " must be a power of p^f");
        const long k = *kopt;
        const LocalValue& tv = targets.at(vi);
        long val_t;  // valuation of the target (LONG_MAX for zero)
        if (tv.is_exact())
            val_t = tv.exact_part().is_zero() ? std::numeric_limits<long>::max()
                                              : valuation(tv.exact_part(), v);
        else
            val_t = tv.padic_part().is_zero() ? std::numeric_limits<long>::max()
                                              : tv.padic_part().valuation();
        const long need = val_t < -k ? -val_t : std::max(0L, k);
        auto& c = clear[v.p];
        c = std::max(c, (need + v.e - 1) / v.e);
        tasks.push_back({vi, k, 0, std::nullopt, std::nullopt});
    }
    Int D(1);
    for (const auto& [p, c] : clear) D *= int_pow(p, static_cast<unsigned long>(c));

    for (auto& task : tasks) {
        const Place& v = places[task.place_idx];
        const long h = v.e * clear[v.p] - task.k;  // depth of z = y*D congruence
        task.depth = std::max(0L, h);
        if (task.depth == 0) continue;
        const LocalValue& tv = targets.at(task.place_idx);
        if (tv.is_exact()) {
            task.exact_center = tv.exact_part() * Rat(D);
        } else {
            const PadicApprox w = tv.padic_part() * PadicApprox::from_rational(v.p, Rat(D), tv.padic_part().prec());
            task.residue_center = w.residue(task.depth);  // PrecisionError if too shallow
        }
    }

    // --- Archimedean data ----------------------------------------------------
    const LocalValue& ta = targets.at(0);
    const bool arch_exact = ta.is_exact();
    std::complex<double> center_embed;
    Rat t_arch_rat(0);        // real place, exact form
    KElem t_arch_elem = KElem::zero(F);
    if (arch_exact) {
        t_arch_elem = ta.exact_part();
        t_arch_rat = ta.exact_part().a();
        center_embed = ta.exact_part().embed();
    } else if (places[0].kind == PlaceKind::real) {
        t_arch_rat = rat_from_double(ta.real_part());
        center_embed = {ta.real_part(), 0.0};
    } else {
        center_embed = ta.complex_part();
    }
    const Rat& b_arch = bounds[0];

    // --- Candidate generation -------------------------------------------------
    struct Best {
        KElem y;
        double content;
    };
    std::optional<Best> best;
    const double content_pad = 1e-18;  // p-adic cancellation floor in selection

    auto consider = [&](const KElem& y) {
        // Verify every constraint; exact wherever the data is exact.
        double content = 1.0;
        for (size_t vi = 1; vi < places.size(); ++vi) {
            const Place& v = places[vi];
            const LocalValue& tv = targets.at(vi);
            if (tv.is_exact()) {
                const Rat a = abs_exact(y - tv.exact_part(), v);
                if (a > bounds[vi]) return;
                content *= to_double(a);
            } else {
                const PadicApprox& t = tv.padic_part();
                const long kk = *value_group_exponent(bounds[vi], v.p, v.f);
                const PadicApprox yp = to_padic(y, v, t.prec());
                // A difference cancelling beyond the window is certainly
                // within any bound the window can resolve.
                try {
                    const PadicApprox diff = yp - t;
                    if (!diff.abs_at_most(-kk)) return;
                    content *= to_double(diff.abs_exact());
                } catch (const PrecisionError&) {
                    content *= content_pad;
                }
            }
        }
        if (places[0].kind == PlaceKind::real) {
            const Rat d = rat_abs(y.a() - t_arch_rat);
            if (d > b_arch) return;
            content *= to_double(d);
        } else if (arch_exact) {
            const Rat d = (y - t_arch_elem).norm();
            if (d > b_arch) return;
            content *= to_double(d);
        } else {
            const double d = std::norm(y.embed() - center_embed);
            if (d > to_double(b_arch) * (1.0 + tau_arch)) return;
            content *= d;
        }
        if (!best || content < best->content ||
            (content == best->content && CanonicalLess{}(y, best->y)))
            best = Best{y, content};
    };

    if (F.is_rationals()) {
        // CRT combine z = y*D mod each p^depth.
        Int Mod(1), r0(0);
        for (const auto& task : tasks) {
            if (task.depth == 0) continue;
            const Place& v = places[task.place_idx];
            const Int ph = int_pow(v.p, static_cast<unsigned long>(task.depth));
            Int rp;
            if (task.exact_center) {
                const Rat w = task.exact_center->a();
                rp = num(w) % ph * modinv_prime_power(den(w), v.p, task.depth) % ph;
            } else {
                rp = *task.residue_center;
            }
            if (rp < 0) rp += ph;
            // z = r0 + Mod * s, require z = rp mod ph.
            const Int inv = modinv_prime_power(Mod % ph, v.p, task.depth);
            Int s = (rp - r0) % ph * inv % ph;
            if (s < 0) s += ph;
            r0 += Mod * s;
            Mod *= ph;
        }
        const Rat lo = Rat(D) * (t_arch_rat - b_arch), hi = Rat(D) * (t_arch_rat + b_arch);
        const Int j_lo = rat_ceil((lo - Rat(r0)) / Rat(Mod));
        const Int j_hi = rat_floor((hi - Rat(r0)) / Rat(Mod));
        if (Int(j_hi - j_lo) + 1 > Int(cap))
            throw CapError("nearest_s_integer: " + Int(j_hi - j_lo + 1).str() +
                           " candidates exceeds cap " + std::to_string(cap));
        for (Int jj = j_lo; jj <= j_hi; ++jj) consider(KElem(F, Rat(r0 + jj * Mod, D)));
    } else {
        const double R = to_double(b_arch) * to_double(D) * to_double(D);
        const double estimate = detail::disc_point_estimate(F, R);
        if (estimate > static_cast<double>(cap))
            throw CapError("nearest_s_integer: estimated " +
                           std::to_string(static_cast<unsigned long long>(estimate)) +
                           " candidates exceeds cap " + std::to_string(cap));
        const std::complex<double> zc = center_embed * to_double(D);
        detail::scan_lattice_disc(F, zc, R * (1.0 + tau_arch), [&](long a, long b) {
            const KElem z(F, Rat(a), Rat(b));
            for (const auto& task : tasks) {
                if (task.depth == 0) continue;
                const Place& v = places[task.place_idx];
                const KElem w = task.exact_center
                                    ? z - *task.exact_center
                                    : z - KElem(F, Rat(*task.residue_center));
                if (!w.is_zero() && valuation(w, v) < task.depth) return;
            }
            consider(KElem(F, Rat(a, D), Rat(b, D)));
        });
    }
    if (!best) return std::nullopt;
    return best->y;
}

}  // namespace sadic
