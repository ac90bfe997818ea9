#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sadic/common.hpp"
#include "sadic/number_field.hpp"
#include "sadic/padic.hpp"
#include "sadic/s_adic.hpp"

namespace sadic {

// ============================================================================
// Ray points
// ============================================================================

/**
 * A point of the positive cone driving a simultaneous-approximation instance:
 * per place v, positive values (t_v^(1), ..., t_v^(m+n)) where the first m
 * entries bound the residual |A^(i)x - y_i|_v and the last n bound |x_j|_v.
 *
 * Invariants: the first m entries are < 1 and the last n are >= 1 at every
 * place; finite-place entries lie in the value group p^(f Z); and the product
 * of all entries over all places equals field_constant(K)^(m+n) within 1e-9
 * relative (exactly representable only over Q, where the constant is 1).
 */
class RayPoint {
public:
    RayPoint(SConfig cfg, int m, int n, std::vector<std::vector<Rat>> components)
        : cfg_(std::move(cfg)), m_(m), n_(n), comps_(std::move(components)) {
        if (m_ < 1 || n_ < 1) throw ValidationError("RayPoint: need m >= 1 and n >= 1");
        if (comps_.size() != cfg_.size())
            throw ValidationError("RayPoint: need one component row per place");
        double prod = 1.0;
        for (size_t vi = 0; vi < comps_.size(); ++vi) {
            const Place& v = cfg_.places()[vi];
            if (comps_[vi].size() != static_cast<size_t>(m_ + n_))
                throw ValidationError("RayPoint: need m+n components per place");
            for (int i = 0; i < m_ + n_; ++i) {
                const Rat& t = comps_[vi][static_cast<size_t>(i)];
                if (t <= 0) throw ValidationError("RayPoint: components must be positive");
                if (i < m_ && t >= 1)
                    throw ValidationError("RayPoint: residual component >= 1 at " + v.key());
                if (i >= m_ && t < 1)
                    throw ValidationError("RayPoint: coordinate component < 1 at " + v.key());
                if (v.kind == PlaceKind::finite && !value_group_exponent(t, v.p, v.f))
                    throw ValidationError("RayPoint: component at " + v.key() +
                                          " not in the value group p^(f Z)");
                prod *= to_double(t);
            }
        }
        const double target = std::pow(field_constant(cfg_.field()), m_ + n_);
        if (std::abs(prod - target) > 1e-9 * target)
            throw ValidationError("RayPoint: component product " + std::to_string(prod) +
                                  " violates the constant-power constraint " +
                                  std::to_string(target));
    }

    [[nodiscard]] const SConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] int n() const noexcept { return n_; }

    [[nodiscard]] const Rat& component(size_t place_idx, int i) const {
        return comps_.at(place_idx).at(static_cast<size_t>(i));
    }
    /// Bound on the i-th residual row at a place (i < m).
    [[nodiscard]] const Rat& eps(size_t place_idx, int i) const {
        if (i < 0 || i >= m_) throw ValidationError("RayPoint: row index out of range");
        return component(place_idx, i);
    }
    /// Bound on the j-th coordinate at a place (j < n).
    [[nodiscard]] const Rat& delta(size_t place_idx, int j) const {
        if (j < 0 || j >= n_) throw ValidationError("RayPoint: column index out of range");
        return component(place_idx, m_ + j);
    }

    /// Sup of the components at one place.
    [[nodiscard]] double place_sup(size_t place_idx) const {
        double s = 0.0;
        for (int i = 0; i < m_ + n_; ++i) s = std::max(s, to_double(component(place_idx, i)));
        return s;
    }
    /// Sup over every place and component.
    [[nodiscard]] double sup_norm() const {
        double s = 0.0;
        for (size_t vi = 0; vi < cfg_.size(); ++vi) s = std::max(s, place_sup(vi));
        return s;
    }

private:
    SConfig cfg_;
    int m_, n_;
    std::vector<std::vector<Rat>> comps_;
};

/**
 * The central-ray point with the given per-place coordinate scales (>= 1, one
 * per place) and residual scales at the finite places (< 1); all first-m and
 * all last-n components agree per place. The archimedean residual components
 * are solved from the product constraint (exactly over Q when possible, in
 * double precision otherwise) and must come out < 1.
 */
inline RayPoint central_ray_point(const SConfig& cfg, int m, int n,
                                  const std::vector<Rat>& delta_scales,
                                  const std::vector<Rat>& eps_finite_scales) {
    if (m < 1 || n < 1) throw ValidationError("central_ray_point: need m >= 1 and n >= 1");
    if (delta_scales.size() != cfg.size())
        throw ValidationError("central_ray_point: need one coordinate scale per place");
    if (eps_finite_scales.size() + 1 != cfg.size())
        throw ValidationError("central_ray_point: need one residual scale per finite place");
    // Product of everything except the archimedean residual block.
    Rat known(1);
    for (size_t vi = 0; vi < cfg.size(); ++vi) {
        if (delta_scales[vi] < 1)
            throw ValidationError("central_ray_point: coordinate scales must be >= 1");
        known *= rat_pow(delta_scales[vi], n);
        if (vi == 0) continue;
        const Rat& ef = eps_finite_scales[vi - 1];
        if (ef <= 0 || ef >= 1)
            throw ValidationError("central_ray_point: finite residual scales must be in (0,1)");
        known *= rat_pow(ef, m);
    }
    // Solve eps_arch^m = const^(m+n) / known.
    Rat eps_arch;
    bool solved_exactly = false;
    if (cfg.field().is_rationals()) {
        const Rat r = Rat(1) / known;  // field constant is exactly 1
        const auto iroot = [](const Int& a, int k) -> std::optional<Int> {
            if (a <= 0) return std::nullopt;
            Int lo(1), hi(1);
            while (int_pow(hi, static_cast<unsigned long>(k)) < a) hi <<= 1;
            while (lo < hi) {
                const Int mid = (lo + hi) / 2;
                if (int_pow(mid, static_cast<unsigned long>(k)) < a) lo = mid + 1;
                else hi = mid;
            }
            return int_pow(lo, static_cast<unsigned long>(k)) == a ? std::optional<Int>(lo)
                                                                   : std::nullopt;
        };
        const auto rn = iroot(num(r), m), rd = iroot(den(r), m);
        if (rn && rd) {
            eps_arch = Rat(*rn, *rd);
            solved_exactly = true;
        }
    }
    if (!solved_exactly) {
        const double target = std::pow(field_constant(cfg.field()), m + n);
        eps_arch = rat_from_double(std::pow(target / to_double(known), 1.0 / m));
    }
    if (eps_arch >= 1 || eps_arch <= 0)
        throw ValidationError(
            "central_ray_point: product constraint demands an archimedean residual scale >= 1; "
            "increase the coordinate scales");
    std::vector<std::vector<Rat>> comps;
    for (size_t vi = 0; vi < cfg.size(); ++vi) {
        std::vector<Rat> row;
        const Rat e = vi == 0 ? eps_arch : eps_finite_scales[vi - 1];
        for (int i = 0; i < m; ++i) row.push_back(e);
        for (int j = 0; j < n; ++j) row.push_back(delta_scales[vi]);
        comps.push_back(std::move(row));
    }
    return RayPoint(cfg, m, n, std::move(comps));
}

// ============================================================================
// Instances and solutions
// ============================================================================

/// Per-place m x n matrix with one local value per entry, index [row][col].
using LocalMatrix = std::vector<std::vector<LocalValue>>;

/// A simultaneous-approximation instance: per-place matrices plus a ray point.
class DirichletInstance {
public:
    DirichletInstance(SConfig cfg, int m, int n, std::vector<LocalMatrix> A, RayPoint t)
        : cfg_(std::move(cfg)), m_(m), n_(n), A_(std::move(A)), t_(std::move(t)) {
        if (m_ < 1 || n_ < 1) throw ValidationError("DirichletInstance: need m,n >= 1");
        if (A_.size() != cfg_.size())
            throw ValidationError("DirichletInstance: need one matrix per place");
        for (size_t vi = 0; vi < A_.size(); ++vi) {
            if (A_[vi].size() != static_cast<size_t>(m_))
                throw ValidationError("DirichletInstance: row count mismatch");
            for (const auto& row : A_[vi]) {
                if (row.size() != static_cast<size_t>(n_))
                    throw ValidationError("DirichletInstance: column count mismatch");
                for (const LocalValue& a : row) a.validate_for(cfg_.places()[vi]);
            }
        }
        if (!(t_.config() == cfg_) || t_.m() != m_ || t_.n() != n_)
            throw ValidationError("DirichletInstance: ray point shape mismatch");
    }

    [[nodiscard]] const SConfig& config() const noexcept { return cfg_; }
    [[nodiscard]] int m() const noexcept { return m_; }
    [[nodiscard]] int n() const noexcept { return n_; }
    [[nodiscard]] const std::vector<LocalMatrix>& matrices() const noexcept { return A_; }
    [[nodiscard]] const RayPoint& ray() const noexcept { return t_; }

    /// The same matrices driven by a different ray point.
    [[nodiscard]] DirichletInstance with_ray(RayPoint t) const {
        return DirichletInstance(cfg_, m_, n_, A_, std::move(t));
    }

private:
    SConfig cfg_;
    int m_, n_;
    std::vector<LocalMatrix> A_;
    RayPoint t_;
};

/// A verified witness: nonzero x with per-row rounding y, plus the residual
/// content of each row and the content of each coordinate of x (products of
/// the per-place absolute values, as doubles).
struct DirichletSolution {
    std::vector<KElem> x;
    std::vector<KElem> y;
    std::vector<double> row_contents;
    std::vector<double> col_contents;
};

// ============================================================================
// Row evaluation
// ============================================================================

namespace detail {

/// A^(i) . x at one place, in the local arithmetic: exact when every entry is
/// exact, double at archimedean places otherwise, truncated p-adic otherwise.
inline LocalValue row_dot(const Place& v, const std::vector<LocalValue>& row,
                          const std::vector<KElem>& x) {
    bool all_exact = true;
    for (const LocalValue& a : row) all_exact = all_exact && a.is_exact();
    if (all_exact) {
        KElem s = KElem::zero(x[0].field());
        for (size_t j = 0; j < row.size(); ++j) s = s + row[j].exact_part() * x[j];
        return LocalValue::exact(s);
    }
    switch (v.kind) {
        case PlaceKind::real: {
            double s = 0.0;
            for (size_t j = 0; j < row.size(); ++j) {
                const double a = row[j].is_exact() ? to_double(row[j].exact_part().a())
                                                   : row[j].real_part();
                s += a * to_double(x[j].a());
            }
            return LocalValue::real(s);
        }
        case PlaceKind::complex: {
            std::complex<double> s{0.0, 0.0};
            for (size_t j = 0; j < row.size(); ++j) {
                const std::complex<double> a = row[j].is_exact() ? row[j].exact_part().embed()
                                                                 : row[j].complex_part();
                s += a * x[j].embed();
            }
            return LocalValue::complex_value(s.real(), s.imag());
        }
        case PlaceKind::finite: {
            PadicApprox s = PadicApprox::zero(v.p);
            for (size_t j = 0; j < row.size(); ++j) {
                const PadicApprox a = row[j].is_exact()
                                          ? to_padic(row[j].exact_part(), v)
                                          : row[j].padic_part();
                s = s + a * to_padic(x[j], v, a.prec());
            }
            return LocalValue::padic(std::move(s));
        }
    }
    throw InvariantError("row_dot: unreachable place kind");
}

/// |y - dot|_v as a double (0.0 when a p-adic difference cancels beyond the
/// precision window, which certifies a residual below every resolvable bound).
inline double residual_abs(const Place& v, const LocalValue& dot, const KElem& y) {
    switch (dot.kind()) {
        case LocalValue::Kind::exact_value:
            return to_double(abs_exact(y - dot.exact_part(), v));
        case LocalValue::Kind::real_value:
            return std::abs(to_double(y.a()) - dot.real_part());
        case LocalValue::Kind::complex_value:
            return std::norm(y.embed() - dot.complex_part());
        case LocalValue::Kind::padic_value:
            try {
                return to_double((to_padic(y, v, dot.padic_part().prec()) - dot.padic_part()).abs_exact());
            } catch (const PrecisionError&) {
                return 0.0;
            }
    }
    throw InvariantError("residual_abs: unreachable value kind");
}

/// Exhaustive minimal-residual search over the coordinate box; nullopt when
/// no candidate satisfies every constraint.
inline std::optional<DirichletSolution> solve_core(
    const DirichletInstance& inst, const std::vector<std::vector<Rat>>& eps_bounds,
    const std::vector<std::vector<Rat>>& delta_bounds, std::uint64_t cap) {
    const SConfig& cfg = inst.config();
    const size_t n_places = cfg.size();
    SBox box(cfg, inst.n());
    for (size_t vi = 0; vi < n_places; ++vi)
        for (int j = 0; j < inst.n(); ++j) box.set_bound(vi, j, delta_bounds[vi][static_cast<size_t>(j)]);

    std::optional<DirichletSolution> best;
    double best_total = 0.0;
    for (const std::vector<KElem>& x : enumerate_box(box, cap)) {
        bool zero = true;
        for (const KElem& c : x) zero = zero && c.is_zero();
        if (zero) continue;
        std::vector<KElem> ys;
        std::vector<double> row_contents;
        double total = 1.0;
        bool ok = true;
        for (int i = 0; i < inst.m() && ok; ++i) {
            std::vector<LocalValue> targets;
            std::vector<Rat> bounds;
            for (size_t vi = 0; vi < n_places; ++vi) {
                targets.push_back(row_dot(cfg.places()[vi], inst.matrices()[vi][static_cast<size_t>(i)], x));
                bounds.push_back(eps_bounds[vi][static_cast<size_t>(i)]);
            }
            const auto y = nearest_s_integer(SAdelePoint(cfg, targets), bounds, cap);
            if (!y) {
                ok = false;
                break;
            }
            double content = 1.0;
            for (size_t vi = 0; vi < n_places; ++vi)
                content *= residual_abs(cfg.places()[vi], targets[vi], *y);
            ys.push_back(*y);
            row_contents.push_back(content);
            total *= content;
        }
        if (!ok) continue;
        if (!best || total < best_total) {
            std::vector<double> col_contents;
            for (int j = 0; j < inst.n(); ++j) {
                double c = 1.0;
                for (size_t vi = 0; vi < n_places; ++vi)
                    c *= to_double(abs_exact(x[static_cast<size_t>(j)], cfg.places()[vi]));
                col_contents.push_back(c);
            }
            best = DirichletSolution{x, std::move(ys), std::move(row_contents),
                                     std::move(col_contents)};
            best_total = total;
        }
    }
    return best;
}

/// The bounds of the untightened system, straight from the ray point.
inline void raw_bounds(const DirichletInstance& inst, std::vector<std::vector<Rat>>& eps_b,
                       std::vector<std::vector<Rat>>& delta_b) {
    const size_t n_places = inst.config().size();
    eps_b.assign(n_places, {});
    delta_b.assign(n_places, {});
    for (size_t vi = 0; vi < n_places; ++vi) {
        for (int i = 0; i < inst.m(); ++i) eps_b[vi].push_back(inst.ray().eps(vi, i));
        for (int j = 0; j < inst.n(); ++j) delta_b[vi].push_back(inst.ray().delta(vi, j));
    }
}

/// eps-tightened bound at one place: the |.|_v bound shrinks by eps^(d_v);
/// finite places snap down to the value group.
inline Rat tighten(const Place& v, const Rat& bound, const Rat& eps_rat) {
    const Rat scaled = bound * rat_pow(eps_rat, v.d_v);
    if (v.kind != PlaceKind::finite) return scaled;
    return rat_pow(Rat(v.p), v.f * value_group_floor_exponent(scaled, v.p, v.f));
}

}  // namespace detail

// ============================================================================
// Solvers
// ============================================================================

/**
 * Exhaustive search for the witness promised by the simultaneous
 * approximation theorem: nonzero x with |x_j|_v <= t_v^(m+j) and per-row
 * roundings y_i with |A_v^(i) x - y_i|_v <= t_v^(i), minimizing the product
 * of the row residual contents (ties resolved by canonical order). Absence
 * after the exhaustive scan would falsify the theorem, so it raises
 * FalsificationError rather than returning quietly.
 */
inline DirichletSolution solve_dirichlet(const DirichletInstance& inst,
                                         std::uint64_t cap = default_enum_cap) {
    std::vector<std::vector<Rat>> eps_b, delta_b;
    detail::raw_bounds(inst, eps_b, delta_b);
    auto sol = detail::solve_core(inst, eps_b, delta_b, cap);
    if (!sol)
        throw FalsificationError(
            "solve_dirichlet: exhaustive search found no witness over " +
            inst.config().label() + " with m=" + std::to_string(inst.m()) +
            " n=" + std::to_string(inst.n()) +
            "; this falsifies the approximation theorem on a valid instance");
    return *sol;
}

/**
 * Witness for the eps-tightened system: every |.|_v bound is multiplied by
 * eps^(d_v) (both residual and coordinate families), snapping down to the
 * value group at finite places. Absence is an ordinary outcome here. eps = 1
 * recovers the untightened system.
 */
inline std::optional<DirichletSolution> is_improvable_at(const DirichletInstance& inst,
                                                         double eps,
                                                         std::uint64_t cap = default_enum_cap) {
    if (!(eps > 0.0) || eps > 1.0)
        throw ValidationError("is_improvable_at: eps must lie in (0, 1]");
    const Rat eps_rat = rat_from_double(eps);
    std::vector<std::vector<Rat>> eps_b, delta_b;
    detail::raw_bounds(inst, eps_b, delta_b);
    for (size_t vi = 0; vi < inst.config().size(); ++vi) {
        const Place& v = inst.config().places()[vi];
        for (Rat& b : eps_b[vi]) b = detail::tighten(v, b, eps_rat);
        for (Rat& b : delta_b[vi]) b = detail::tighten(v, b, eps_rat);
    }
    return detail::solve_core(inst, eps_b, delta_b, cap);
}

/// Re-verifies a claimed witness against the eps-tightened system: exact
/// comparisons wherever the data is exact, tau_arch slack at archimedean
/// places. eps = 1 checks the untightened system.
[[nodiscard]] inline bool verify_dirichlet_solution(const DirichletInstance& inst,
                                                    const DirichletSolution& sol,
                                                    double eps = 1.0) {
    const SConfig& cfg = inst.config();
    if (sol.x.size() != static_cast<size_t>(inst.n()) ||
        sol.y.size() != static_cast<size_t>(inst.m()))
        return false;
    bool zero = true;
    for (const KElem& c : sol.x) zero = zero && c.is_zero();
    if (zero) return false;
    for (const KElem& c : sol.x)
        if (!is_s_integer(c, cfg)) return false;
    for (const KElem& c : sol.y)
        if (!is_s_integer(c, cfg)) return false;
    const Rat eps_rat = rat_from_double(eps);
    for (size_t vi = 0; vi < cfg.size(); ++vi) {
        const Place& v = cfg.places()[vi];
        for (int j = 0; j < inst.n(); ++j) {
            const Rat bound = detail::tighten(v, inst.ray().delta(vi, j), eps_rat);
            const Rat a = abs_exact(sol.x[static_cast<size_t>(j)], v);
            if (v.kind == PlaceKind::finite ? a > bound
                                            : to_double(a) > to_double(bound) * (1 + tau_arch))
                return false;
        }
        for (int i = 0; i < inst.m(); ++i) {
            const Rat bound = detail::tighten(v, inst.ray().eps(vi, i), eps_rat);
            const LocalValue dot =
                detail::row_dot(v, inst.matrices()[vi][static_cast<size_t>(i)], sol.x);
            if (dot.is_exact()) {
                const Rat a = abs_exact(sol.y[static_cast<size_t>(i)] - dot.exact_part(), v);
                if (v.kind == PlaceKind::finite
                        ? a > bound
                        : to_double(a) > to_double(bound) * (1 + tau_arch))
                    return false;
            } else if (v.kind == PlaceKind::finite) {
                const long k = *value_group_exponent(bound, v.p, v.f);
                try {
                    const PadicApprox diff =
                        to_padic(sol.y[static_cast<size_t>(i)], v, dot.padic_part().prec()) -
                        dot.padic_part();
                    if (!diff.abs_at_most(-k)) return false;
                } catch (const PrecisionError&) {
                    // Cancellation beyond the window certifies the bound.
                }
            } else {
                const double r = detail::residual_abs(v, dot, sol.y[static_cast<size_t>(i)]);
                if (r > to_double(bound) * (1 + tau_arch)) return false;
            }
        }
    }
    return true;
}

// ============================================================================
// Improvability scans along a ray schedule
// ============================================================================

/// Verdict at one schedule point.
struct ScanItem {
    size_t t_index;  // position in the original schedule
    RayPoint t;
    bool improvable;
    std::optional<DirichletSolution> witness;
};

struct ScanResult {
    std::vector<ScanItem> items;  // schedule points past the threshold, in order
    bool aggregate;               // true iff improvable at every tested point
};

/**
 * Horizon-truncated improvability scan: runs is_improvable_at on the fixed
 * matrices at every schedule point whose per-place sups all exceed t0. The
 * aggregate is an upper approximation of membership in the improvable class
 * along the ray (a false verdict at any tested point settles non-membership
 * up to the horizon; a true aggregate is evidence, not proof).
 */
inline ScanResult scan_di(const DirichletInstance& base, const std::vector<RayPoint>& schedule,
                          double eps, double t0, std::uint64_t cap = default_enum_cap) {
    if (schedule.empty()) throw ValidationError("scan_di: empty schedule");
    const size_t n_places = base.config().size();
    if (schedule.size() >= 2) {
        // The schedule must grow somewhere at every place (horizon surrogate
        // of an unbounded ray).
        for (size_t vi = 0; vi < n_places; ++vi) {
            bool grows = false;
            for (size_t k = 0; k + 1 < schedule.size() && !grows; ++k)
                grows = schedule[k + 1].place_sup(vi) > schedule[k].place_sup(vi);
            if (!grows)
                throw ValidationError("scan_di: schedule never grows at " +
                                      base.config().places()[vi].key());
        }
    }
    ScanResult result;
    result.aggregate = true;
    for (size_t idx = 0; idx < schedule.size(); ++idx) {
        bool past = true;
        for (size_t vi = 0; vi < n_places; ++vi)
            past = past && schedule[idx].place_sup(vi) > t0;
        if (!past) continue;
        const DirichletInstance inst = base.with_ray(schedule[idx]);
        auto witness = is_improvable_at(inst, eps, cap);
        result.aggregate = result.aggregate && witness.has_value();
        result.items.push_back(ScanItem{idx, schedule[idx], witness.has_value(), std::move(witness)});
    }
    if (result.items.empty())
        throw ValidationError("scan_di: no schedule point lies past the threshold t0");
    return result;
}

/**
 * Central-ray schedule: geometric growth of the archimedean coordinate scale
 * and unit steps in the finite coordinate exponents; finite residual scales
 * stay fixed and the archimedean residual absorbs the product constraint.
 */
inline std::vector<RayPoint> central_ray_schedule(const SConfig& cfg, int m, int n, size_t count,
                                                  const Rat& delta_arch0, const Rat& ratio,
                                                  const std::vector<long>& delta_exp0,
                                                  const std::vector<long>& eps_exp) {
    if (count == 0) throw ValidationError("central_ray_schedule: need at least one point");
    if (ratio <= 1) throw ValidationError("central_ray_schedule: ratio must exceed 1");
    if (delta_exp0.size() + 1 != cfg.size() || eps_exp.size() + 1 != cfg.size())
        throw ValidationError("central_ray_schedule: need one exponent per finite place");
    std::vector<RayPoint> out;
    Rat delta_arch = delta_arch0;
    for (size_t s = 0; s < count; ++s) {
        std::vector<Rat> deltas{delta_arch};
        std::vector<Rat> eps_fin;
        for (size_t q = 1; q < cfg.size(); ++q) {
            const Place& v = cfg.places()[q];
            deltas.push_back(rat_pow(Rat(v.p), v.f * (delta_exp0[q - 1] + static_cast<long>(s))));
            eps_fin.push_back(rat_pow(Rat(v.p), v.f * eps_exp[q - 1]));
        }
        out.push_back(central_ray_point(cfg, m, n, deltas, eps_fin));
        delta_arch *= ratio;
    }
    return out;
}

}  // namespace sadic
