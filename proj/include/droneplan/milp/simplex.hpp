#ifndef DRONEPLAN_MILP_SIMPLEX_HPP
#define DRONEPLAN_MILP_SIMPLEX_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <vector>

#include "droneplan/milp/model.hpp"

namespace droneplan::milp::detail {

enum class LpStatus { OPTIMAL, INFEASIBLE, UNBOUNDED, ITER_LIMIT };

/// Bounded-variable simplex over the computational form
///     A x + s = rhs,   lower <= (x, s) <= upper,
/// where each row owns one slack column whose bounds encode the relation
/// (<=: s >= 0, >=: s <= 0, =: s fixed at 0). The basis inverse is kept
/// explicitly and updated in product form; any optimal basis stays dual
/// feasible under bound changes, which is what makes warm-started dual
/// re-solves cheap inside branch and bound.
class SimplexEngine {
  public:
    enum class ColStat : unsigned char { BASIC, AT_LOWER, AT_UPPER, FREE };

    explicit SimplexEngine(const MILPModel& model) {
        m_ = model.num_constraints();
        n_struct_ = model.num_variables();
        n_total_ = n_struct_ + m_;
        min_sign_ = model.sense == Sense::MINIMIZE ? 1.0 : -1.0;

        cols_.assign(n_struct_, {});
        for (int r = 0; r < m_; ++r)
            for (const auto& t : model.constraints[r].terms)
                if (t.coef != 0.0) cols_[t.var].push_back({r, t.coef});

        lower_.assign(n_total_, 0.0);
        upper_.assign(n_total_, 0.0);
        cost_.assign(n_total_, 0.0);
        rhs_.assign(m_, 0.0);
        for (int j = 0; j < n_struct_; ++j) {
            lower_[j] = model.variables[j].lower;
            upper_[j] = model.variables[j].upper;
        }
        for (const auto& t : model.objective) cost_[t.var] += min_sign_ * t.coef;
        for (int r = 0; r < m_; ++r) {
            rhs_[r] = model.constraints[r].rhs;
            int s = n_struct_ + r;
            switch (model.constraints[r].relation) {
                case Relation::LESS_EQUAL: lower_[s] = 0.0; upper_[s] = kInfinity; break;
                case Relation::GREATER_EQUAL: lower_[s] = -kInfinity; upper_[s] = 0.0; break;
                case Relation::EQUAL: lower_[s] = 0.0; upper_[s] = 0.0; break;
            }
        }

        binv_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
        basic_.assign(m_, -1);
        stat_.assign(n_total_, ColStat::AT_LOWER);
        pos_.assign(n_total_, -1);
        xb_.assign(m_, 0.0);
        reset_to_slack_basis();
    }

    int num_rows() const { return m_; }
    int num_structural() const { return n_struct_; }
    long iterations() const { return iterations_; }
    long inverse_rebuilds() const { return rebuilds_; }

    double lower_bound(int col) const { return lower_[col]; }
    double upper_bound(int col) const { return upper_[col]; }

    /// Changes the bounds of one structural column in place. Nonbasic
    /// columns snap to the moved bound; call recompute_basics() once after
    /// a batch of changes.
    void set_bounds(int col, double lo, double up) {
        lower_[col] = lo;
        upper_[col] = up;
        if (stat_[col] == ColStat::AT_LOWER && !std::isfinite(lo))
            stat_[col] = std::isfinite(up) ? ColStat::AT_UPPER : ColStat::FREE;
        if (stat_[col] == ColStat::AT_UPPER && !std::isfinite(up))
            stat_[col] = std::isfinite(lo) ? ColStat::AT_LOWER : ColStat::FREE;
    }

    void reset_to_slack_basis() {
        std::fill(binv_.begin(), binv_.end(), 0.0);
        for (int r = 0; r < m_; ++r) {
            binv_[static_cast<std::size_t>(r) * m_ + r] = 1.0;
            basic_[r] = n_struct_ + r;
        }
        std::fill(pos_.begin(), pos_.end(), -1);
        for (int r = 0; r < m_; ++r) pos_[n_struct_ + r] = r;
        for (int j = 0; j < n_total_; ++j) {
            if (pos_[j] >= 0) {
                stat_[j] = ColStat::BASIC;
            } else if (std::isfinite(lower_[j])) {
                stat_[j] = ColStat::AT_LOWER;
            } else if (std::isfinite(upper_[j])) {
                stat_[j] = ColStat::AT_UPPER;
            } else {
                stat_[j] = ColStat::FREE;
            }
        }
        recompute_basics();
    }

    /// Recomputes the basic variable values from scratch:
    /// x_B = B^-1 (rhs - N x_N).
    void recompute_basics() {
        std::vector<double> r(rhs_);
        for (int j = 0; j < n_total_; ++j) {
            if (stat_[j] == ColStat::BASIC) continue;
            double v = nonbasic_value(j);
            if (v == 0.0) continue;
            if (j < n_struct_) {
                for (const auto& [row, a] : cols_[j]) r[row] -= a * v;
            } else {
                r[j - n_struct_] -= v;
            }
        }
        for (int i = 0; i < m_; ++i) {
            const double* row = &binv_[static_cast<std::size_t>(i) * m_];
            double acc = 0.0;
            for (int k = 0; k < m_; ++k) acc += row[k] * r[k];
            xb_[i] = acc;
        }
    }

    /// Minimization-normalized objective value of the current point.
    double objective_normalized() const {
        double obj = 0.0;
        for (int i = 0; i < m_; ++i) obj += cost_[basic_[i]] * xb_[i];
        for (int j = 0; j < n_total_; ++j)
            if (stat_[j] != ColStat::BASIC && cost_[j] != 0.0)
                obj += cost_[j] * nonbasic_value(j);
        return obj;
    }

    double original_sign() const { return min_sign_; }

    double column_value(int j) const {
        if (stat_[j] == ColStat::BASIC) return xb_[pos_[j]];
        return nonbasic_value(j);
    }

    void structural_values(std::vector<double>& out) const {
        out.resize(n_struct_);
        for (int j = 0; j < n_struct_; ++j) out[j] = column_value(j);
    }

    /// Row duals y = c_B B^-1 of the minimization-normalized problem.
    void row_duals(std::vector<double>& y) const { btran_cost(cost_, y); }

    LpStatus solve_primal(const SolverParams& params, long max_iter) {
        int restarts = 0;
        for (;;) {
            LpStatus st = primal_loop(params, max_iter);
            if (st == LpStatus::ITER_LIMIT || st == LpStatus::UNBOUNDED) return st;
            // Confirm the verdict against freshly recomputed values; a
            // drifted inverse occasionally produces a premature conclusion.
            recompute_basics();
            bool feasible = max_violation(params) <= 0.0;
            if (st == LpStatus::OPTIMAL && feasible && !has_profitable_column()) return st;
            if (st == LpStatus::INFEASIBLE && !feasible && restarts > 0) return st;
            if (++restarts > 3) return st;
            if (!rebuild_inverse()) discard_basis();
            recompute_basics();
        }
    }

    LpStatus solve_dual(const SolverParams& params, long max_iter) {
        int restarts = 0;
        for (;;) {
            // A mostly-zero objective leaves swaths of columns at reduced
            // cost zero, and the dual then shuffles across that plateau for
            // thousands of pivots. Shifting every boxed nonbasic cost by a
            // tiny deterministic amount, away from zero in the direction its
            // bound status requires, breaks the ties without disturbing dual
            // feasibility. True costs come back before any verdict below;
            // the primal mop-up removes whatever bias the shift left behind.
            std::vector<double> true_cost = cost_;
            for (int j = 0; j < n_total_; ++j) {
                if (lower_[j] == upper_[j]) continue;
                double xi = 1e-6 * (1.0 + std::abs(cost_[j])) * unit_noise(j);
                if (stat_[j] == ColStat::AT_LOWER)
                    cost_[j] += xi;
                else if (stat_[j] == ColStat::AT_UPPER)
                    cost_[j] -= xi;
            }
            LpStatus st = dual_loop(params, max_iter);
            cost_ = std::move(true_cost);
            if (st == LpStatus::ITER_LIMIT) return st;
            if (st == LpStatus::INFEASIBLE) return st;
            recompute_basics();
            if (max_violation(params) <= 0.0 && !has_profitable_column()) return st;
            // Primal-feasible point, true costs: let the primal close the
            // perturbation gap (and any profitable column a drifted inverse
            // hid) from the basis the dual produced.
            st = primal_loop(params, max_iter);
            if (st != LpStatus::OPTIMAL) return st;
            recompute_basics();
            if (max_violation(params) <= 0.0 && !has_profitable_column())
                return LpStatus::OPTIMAL;
            if (++restarts > 3) return LpStatus::ITER_LIMIT;
            if (!rebuild_inverse()) discard_basis();
            recompute_basics();
        }
    }

  private:
    static constexpr double kDualTol = 1e-9;
    static constexpr double kPivotTol = 1e-9;
    static constexpr double kDropTol = 1e-11;

    double nonbasic_value(int j) const {
        switch (stat_[j]) {
            case ColStat::AT_LOWER: return lower_[j];
            case ColStat::AT_UPPER: return upper_[j];
            case ColStat::FREE: return 0.0;
            case ColStat::BASIC: break;
        }
        return xb_[pos_[j]];
    }

    double feas_tol(const SolverParams& params, double bound) const {
        return params.feasibility_tol * (1.0 + std::abs(bound));
    }

    /// Deterministic per-column factor in [0.5, 1.5) used to scale the
    /// dual anti-degeneracy cost shifts; a hash keeps ties broken the same
    /// way on every run.
    static double unit_noise(int j) {
        std::uint64_t z = static_cast<std::uint64_t>(j) + 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        z ^= z >> 31;
        return 0.5 + static_cast<double>(z >> 11) * (1.0 / 9007199254740992.0);
    }

    /// alpha = B^-1 A_j for a structural or slack column.
    void ftran(int j, std::vector<double>& alpha) const {
        alpha.assign(m_, 0.0);
        if (j < n_struct_) {
            for (const auto& [row, a] : cols_[j])
                for (int i = 0; i < m_; ++i)
                    alpha[i] += a * binv_[static_cast<std::size_t>(i) * m_ + row];
        } else {
            int r = j - n_struct_;
            for (int i = 0; i < m_; ++i)
                alpha[i] = binv_[static_cast<std::size_t>(i) * m_ + r];
        }
    }

    /// y = c_B B^-1 for an arbitrary cost vector (indexed by column id).
    void btran_cost(const std::vector<double>& cost, std::vector<double>& y) const {
        y.assign(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double cb = cost[basic_[i]];
            if (cb == 0.0) continue;
            const double* row = &binv_[static_cast<std::size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) y[k] += cb * row[k];
        }
    }

    double price_column(int j, const std::vector<double>& y) const {
        double acc = 0.0;
        if (j < n_struct_) {
            for (const auto& [row, a] : cols_[j]) acc += a * y[row];
        } else {
            acc = y[j - n_struct_];
        }
        return acc;
    }

    void pivot(int leave_pos, int enter_col, const std::vector<double>& alpha) {
        double piv = alpha[leave_pos];
        double* prow = &binv_[static_cast<std::size_t>(leave_pos) * m_];
        double inv = 1.0 / piv;
        for (int k = 0; k < m_; ++k) prow[k] *= inv;
        for (int i = 0; i < m_; ++i) {
            if (i == leave_pos) continue;
            double f = alpha[i];
            if (f == 0.0) continue;
            double* row = &binv_[static_cast<std::size_t>(i) * m_];
            for (int k = 0; k < m_; ++k) row[k] -= f * prow[k];
        }
        int leave_col = basic_[leave_pos];
        pos_[leave_col] = -1;
        basic_[leave_pos] = enter_col;
        pos_[enter_col] = leave_pos;
        stat_[enter_col] = ColStat::BASIC;
        ++iterations_;
        ++since_refactor_;
    }

    /// Product-form updates drift; refactorize on a fixed cadence so the
    /// inverse error stays bounded. Falls back to the slack basis when the
    /// recorded basis has degenerated into a dependent set.
    void maybe_refactor() {
        if (since_refactor_ < 512) return;
        if (!rebuild_inverse()) discard_basis();
        recompute_basics();
    }

    /// Dense refactorization of B^-1 by Gauss-Jordan elimination with
    /// partial pivoting. Returns false when the recorded basis turns out
    /// linearly dependent (possible after a pivot on a noise-level
    /// element); callers then discard the basis instead of trusting it.
    bool rebuild_inverse() {
        ++rebuilds_;
        since_refactor_ = 0;
        std::vector<double> dense(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            int j = basic_[i];
            if (j < n_struct_) {
                for (const auto& [row, a] : cols_[j])
                    dense[static_cast<std::size_t>(row) * m_ + i] = a;
            } else {
                dense[static_cast<std::size_t>(j - n_struct_) * m_ + i] = 1.0;
            }
        }
        std::vector<double> inv(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int i = 0; i < m_; ++i) inv[static_cast<std::size_t>(i) * m_ + i] = 1.0;
        for (int c = 0; c < m_; ++c) {
            int piv_row = c;
            double best = std::abs(dense[static_cast<std::size_t>(c) * m_ + c]);
            for (int r = c + 1; r < m_; ++r) {
                double v = std::abs(dense[static_cast<std::size_t>(r) * m_ + c]);
                if (v > best) {
                    best = v;
                    piv_row = r;
                }
            }
            if (best < 1e-12) return false;
            if (piv_row != c) {
                for (int k = 0; k < m_; ++k) {
                    std::swap(dense[static_cast<std::size_t>(piv_row) * m_ + k],
                              dense[static_cast<std::size_t>(c) * m_ + k]);
                    std::swap(inv[static_cast<std::size_t>(piv_row) * m_ + k],
                              inv[static_cast<std::size_t>(c) * m_ + k]);
                }
            }
            double inv_piv = 1.0 / dense[static_cast<std::size_t>(c) * m_ + c];
            for (int k = 0; k < m_; ++k) {
                dense[static_cast<std::size_t>(c) * m_ + k] *= inv_piv;
                inv[static_cast<std::size_t>(c) * m_ + k] *= inv_piv;
            }
            for (int r = 0; r < m_; ++r) {
                if (r == c) continue;
                double f = dense[static_cast<std::size_t>(r) * m_ + c];
                if (f == 0.0) continue;
                for (int k = 0; k < m_; ++k) {
                    dense[static_cast<std::size_t>(r) * m_ + k] -=
                        f * dense[static_cast<std::size_t>(c) * m_ + k];
                    inv[static_cast<std::size_t>(r) * m_ + k] -=
                        f * inv[static_cast<std::size_t>(c) * m_ + k];
                }
            }
        }
        binv_ = std::move(inv);
        return true;
    }

    /// Drops the current (untrustworthy) basis entirely and restarts from
    /// the all-slack identity basis.
    void discard_basis() {
        std::fill(binv_.begin(), binv_.end(), 0.0);
        for (int r = 0; r < m_; ++r) binv_[static_cast<std::size_t>(r) * m_ + r] = 1.0;
        std::fill(pos_.begin(), pos_.end(), -1);
        for (int r = 0; r < m_; ++r) {
            int old = basic_[r];
            if (old < n_struct_) {
                double lo = lower_[old], up = upper_[old];
                if (std::isfinite(lo))
                    stat_[old] = ColStat::AT_LOWER;
                else if (std::isfinite(up))
                    stat_[old] = ColStat::AT_UPPER;
                else
                    stat_[old] = ColStat::FREE;
            }
            basic_[r] = n_struct_ + r;
            pos_[n_struct_ + r] = r;
            stat_[n_struct_ + r] = ColStat::BASIC;
        }
        since_refactor_ = 0;
        recompute_basics();
    }

    double max_violation(const SolverParams& params) const {
        double worst = 0.0;
        for (int i = 0; i < m_; ++i) {
            int b = basic_[i];
            double below = lower_[b] - xb_[i] - feas_tol(params, lower_[b]);
            double above = xb_[i] - upper_[b] - feas_tol(params, upper_[b]);
            worst = std::max(worst, std::max(below, above));
        }
        return worst;
    }

    bool has_profitable_column() const {
        std::vector<double> y;
        btran_cost(cost_, y);
        for (int j = 0; j < n_total_; ++j) {
            if (stat_[j] == ColStat::BASIC || lower_[j] == upper_[j]) continue;
            double d = cost_[j] - price_column(j, y);
            if (stat_[j] == ColStat::AT_LOWER && d < -1e-8) return true;
            if (stat_[j] == ColStat::AT_UPPER && d > 1e-8) return true;
            if (stat_[j] == ColStat::FREE && std::abs(d) > 1e-8) return true;
        }
        return false;
    }

    LpStatus primal_loop(const SolverParams& params, long max_iter) {
        std::vector<double> phase_cost(n_total_, 0.0);
        std::vector<double> y, alpha;
        long degen_streak = 0;
        bool bland = false;

        for (long it = 0; it < max_iter; ++it) {
            maybe_refactor();
            if ((it & 127) == 127) recompute_basics();

            // Phase selection: any basic outside its bounds puts us in
            // phase 1, minimizing the total infeasibility.
            bool infeasible = false;
            for (int i = 0; i < m_; ++i) {
                int b = basic_[i];
                phase_cost[b] = 0.0;
                if (xb_[i] < lower_[b] - feas_tol(params, lower_[b])) {
                    phase_cost[b] = -1.0;
                    infeasible = true;
                } else if (xb_[i] > upper_[b] + feas_tol(params, upper_[b])) {
                    phase_cost[b] = 1.0;
                    infeasible = true;
                }
            }

            const std::vector<double>& price_cost = infeasible ? phase_cost : cost_;
            btran_cost(price_cost, y);

            int enter = -1;
            double best_score = 0.0;
            for (int j = 0; j < n_total_; ++j) {
                if (stat_[j] == ColStat::BASIC || lower_[j] == upper_[j]) continue;
                double cj = infeasible ? 0.0 : cost_[j];
                double d = cj - price_column(j, y);
                double score = 0.0;
                if (stat_[j] == ColStat::AT_LOWER && d < -kDualTol)
                    score = -d;
                else if (stat_[j] == ColStat::AT_UPPER && d > kDualTol)
                    score = d;
                else if (stat_[j] == ColStat::FREE && std::abs(d) > kDualTol)
                    score = std::abs(d);
                if (score <= 0.0) continue;
                if (bland) {
                    enter = j;
                    best_score = score;
                    break;
                }
                if (score > best_score) {
                    best_score = score;
                    enter = j;
                }
            }
            if (enter < 0) return infeasible ? LpStatus::INFEASIBLE : LpStatus::OPTIMAL;

            double d_enter = (infeasible ? 0.0 : cost_[enter]) - price_column(enter, y);
            double dir = 1.0;
            if (stat_[enter] == ColStat::AT_UPPER) dir = -1.0;
            if (stat_[enter] == ColStat::FREE) dir = d_enter < 0.0 ? 1.0 : -1.0;

            ftran(enter, alpha);
            double alpha_inf = 0.0;
            for (int i = 0; i < m_; ++i) alpha_inf = std::max(alpha_inf, std::abs(alpha[i]));

            // Two-pass ratio test. In phase 1 an out-of-bounds basic blocks
            // at the violated bound it is moving toward (no pass-through).
            // Rows with coefficients at the noise floor of the transformed
            // column are not usable pivots, so they do not participate as
            // blockers at all: letting one block at a degenerate corner would
            // wedge the iteration. Pass 1 finds the longest step that keeps
            // every row inside its feasibility band; pass 2 takes the
            // best-conditioned pivot among rows whose exact ratio fits under
            // it. Degenerate ties then resolve toward large pivots, and any
            // bound overshoot stays within each row's own tolerance.
            const double rate_floor = std::max(kPivotTol, 1e-10 * alpha_inf);
            double own_range = upper_[enter] - lower_[enter];
            const double theta_cap = std::isfinite(own_range) ? own_range : kInfinity;

            auto row_targets = [&](int i, double rate, double& strict, double& relaxed) {
                int b = basic_[i];
                double ftl = feas_tol(params, lower_[b]);
                double ftu = feas_tol(params, upper_[b]);
                strict = kInfinity;
                relaxed = kInfinity;
                if (xb_[i] < lower_[b] - ftl) {
                    if (rate > 0.0) {
                        strict = lower_[b];
                        relaxed = lower_[b] + ftl;
                    }
                } else if (xb_[i] > upper_[b] + ftu) {
                    if (rate < 0.0) {
                        strict = upper_[b];
                        relaxed = upper_[b] - ftu;
                    }
                } else if (rate > 0.0) {
                    strict = upper_[b];
                    relaxed = upper_[b] + ftu;
                } else {
                    strict = lower_[b];
                    relaxed = lower_[b] - ftl;
                }
            };

            double theta_rel = theta_cap;
            double strict_min = kInfinity;
            for (int i = 0; i < m_; ++i) {
                double rate = -dir * alpha[i];
                if (std::abs(rate) < rate_floor) continue;
                double target, target_rel;
                row_targets(i, rate, target, target_rel);
                if (!std::isfinite(target)) continue;
                double t = std::max(0.0, (target - xb_[i]) / rate);
                double t_rel = std::max(0.0, (target_rel - xb_[i]) / rate);
                theta_rel = std::min(theta_rel, t_rel);
                strict_min = std::min(strict_min, t);
            }

            int block = -1;
            double best_t = theta_rel;
            double block_piv = 0.0;
            int bland_col = std::numeric_limits<int>::max();
            for (int i = 0; i < m_; ++i) {
                double rate = -dir * alpha[i];
                if (std::abs(rate) < rate_floor) continue;
                double target, target_rel;
                row_targets(i, rate, target, target_rel);
                if (!std::isfinite(target)) continue;
                double t = std::max(0.0, (target - xb_[i]) / rate);
                if (bland) {
                    // Exact smallest ratio, smallest variable tie break:
                    // finite by the classic argument.
                    if (t <= strict_min + 1e-12 && basic_[i] < bland_col) {
                        bland_col = basic_[i];
                        block = i;
                        best_t = t;
                        block_piv = alpha[i];
                    }
                    continue;
                }
                if (t > theta_rel) continue;
                if (block < 0 || std::abs(alpha[i]) > std::abs(block_piv)) {
                    block = i;
                    best_t = t;
                    block_piv = alpha[i];
                }
            }

            if (!std::isfinite(best_t)) {
                if (infeasible) {
                    // A descent direction of the infeasibility sum cannot be
                    // unbounded; the inverse must have drifted.
                    if (!rebuild_inverse()) discard_basis();
                    recompute_basics();
                    continue;
                }
                return LpStatus::UNBOUNDED;
            }

            if (best_t < 1e-10) {
                if (++degen_streak > 200) bland = true;
            } else {
                degen_streak = 0;
                bland = false;
            }

            if (block < 0) {
                // Bound flip: the entering column traverses its whole range.
                for (int i = 0; i < m_; ++i)
                    if (alpha[i] != 0.0) xb_[i] -= dir * best_t * alpha[i];
                stat_[enter] =
                    stat_[enter] == ColStat::AT_LOWER ? ColStat::AT_UPPER : ColStat::AT_LOWER;
                ++iterations_;
                continue;
            }

            // Unreachable with the rate floor above; kept as a safeguard. A
            // stale inverse earns a refactorization, a fresh one means the
            // basis is wedged and gets discarded outright.
            if (std::abs(alpha[block]) < rate_floor) {
                if (since_refactor_ == 0 || !rebuild_inverse()) discard_basis();
                recompute_basics();
                continue;
            }

            double enter_val = nonbasic_value(enter) + dir * best_t;
            int leave_col = basic_[block];
            double rate = -dir * alpha[block];
            ColStat leave_stat = rate > 0.0 ? ColStat::AT_UPPER : ColStat::AT_LOWER;
            if (xb_[block] < lower_[leave_col]) leave_stat = ColStat::AT_LOWER;
            if (xb_[block] > upper_[leave_col]) leave_stat = ColStat::AT_UPPER;
            for (int i = 0; i < m_; ++i)
                if (alpha[i] != 0.0) xb_[i] -= dir * best_t * alpha[i];
            pivot(block, enter, alpha);
            stat_[leave_col] = leave_stat;
            xb_[block] = enter_val;
        }
        return LpStatus::ITER_LIMIT;
    }

    LpStatus dual_loop(const SolverParams& params, long max_iter) {
        std::vector<double> y, alpha, arow(n_total_, 0.0);
        std::vector<double> d(n_total_, 0.0);
        auto refresh_duals = [&]() {
            btran_cost(cost_, y);
            for (int j = 0; j < n_total_; ++j)
                d[j] = stat_[j] == ColStat::BASIC ? 0.0 : cost_[j] - price_column(j, y);
        };
        refresh_duals();

        long degen_streak = 0;
        bool bland = false;
        std::vector<char> banned(n_total_, 0);
        std::vector<int> banned_list;

        for (long it = 0; it < max_iter; ++it) {
            if (since_refactor_ >= 512) {
                // Dual feasibility cannot survive a discarded basis, so a
                // failed refactorization ends this warm-started attempt.
                if (!rebuild_inverse()) return LpStatus::ITER_LIMIT;
                recompute_basics();
                refresh_duals();
            }
            if ((it & 127) == 127) recompute_basics();
            if ((it & 511) == 511) refresh_duals();

            // Leaving row: largest bound violation, or the violated row with
            // the smallest basic variable once anti-cycling is on (both
            // choices must follow the textbook rule for finiteness).
            int leave = -1;
            double worst = 0.0;
            double target = 0.0;
            double sigma = 0.0;
            int bland_leave_col = std::numeric_limits<int>::max();
            for (int i = 0; i < m_; ++i) {
                int b = basic_[i];
                double below = lower_[b] - xb_[i] - feas_tol(params, lower_[b]);
                double above = xb_[i] - upper_[b] - feas_tol(params, upper_[b]);
                if (below <= 0.0 && above <= 0.0) continue;
                if (bland) {
                    if (b < bland_leave_col) {
                        bland_leave_col = b;
                        leave = i;
                        target = below > above ? lower_[b] : upper_[b];
                        sigma = below > above ? -1.0 : 1.0;
                    }
                    continue;
                }
                if (below > worst) {
                    worst = below;
                    leave = i;
                    target = lower_[b];
                    sigma = -1.0;
                }
                if (above > worst) {
                    worst = above;
                    leave = i;
                    target = upper_[b];
                    sigma = 1.0;
                }
            }
            if (leave < 0) return LpStatus::OPTIMAL;

            const double* rho = &binv_[static_cast<std::size_t>(leave) * m_];

            double row_norm = 0.0;
            for (int j = 0; j < n_total_; ++j) {
                if (stat_[j] == ColStat::BASIC || lower_[j] == upper_[j]) {
                    arow[j] = 0.0;
                    continue;
                }
                double a;
                if (j < n_struct_) {
                    a = 0.0;
                    for (const auto& [row, coef] : cols_[j]) a += coef * rho[row];
                } else {
                    a = rho[j - n_struct_];
                }
                arow[j] = a;
                row_norm = std::max(row_norm, std::abs(a));
            }
            // Pivots at the noise floor of the transformed row are artifacts
            // of inverse drift; accepting one corrupts the recorded basis.
            const double piv_tol = std::max(kPivotTol, 1e-10 * row_norm);

            // Two-pass ratio test over the reduced costs: pass 1 finds the
            // longest dual step that keeps every column within its dual
            // tolerance, pass 2 takes the best-conditioned pivot among
            // columns whose exact ratio fits under it. Degenerate ties then
            // resolve toward large pivots instead of stalling. A candidate
            // whose transformed column disagrees with the row value, or
            // pivots at the noise floor of a fresh inverse, is barred for
            // this row and the selection repeats; the same evidence against
            // a stale inverse earns one refactorization instead.
            auto eligible = [&](int j, double abar) {
                return (stat_[j] == ColStat::AT_LOWER && abar > piv_tol) ||
                       (stat_[j] == ColStat::AT_UPPER && abar < -piv_tol) ||
                       (stat_[j] == ColStat::FREE && std::abs(abar) > piv_tol);
            };
            for (int j : banned_list) banned[j] = 0;
            banned_list.clear();

            int enter = -1;
            bool redo_row = false;
            for (;;) {
                enter = -1;
                double best_piv = 0.0;
                bool rejected_small = false;
                double theta_rel = kInfinity;
                double strict_min = kInfinity;
                for (int j = 0; j < n_total_; ++j) {
                    if (banned[j] || stat_[j] == ColStat::BASIC ||
                        lower_[j] == upper_[j])
                        continue;
                    double abar = sigma * arow[j];
                    if (!eligible(j, abar)) {
                        bool ok_abs =
                            (stat_[j] == ColStat::AT_LOWER && abar > kPivotTol) ||
                            (stat_[j] == ColStat::AT_UPPER && abar < -kPivotTol) ||
                            (stat_[j] == ColStat::FREE && std::abs(abar) > kPivotTol);
                        if (ok_abs) rejected_small = true;
                        continue;
                    }
                    double ratio = d[j] / abar;
                    strict_min = std::min(strict_min, ratio);
                    theta_rel = std::min(
                        theta_rel, ratio + 1e-7 * (1.0 + std::abs(d[j])) / std::abs(abar));
                }
                for (int j = 0; j < n_total_ && strict_min < kInfinity; ++j) {
                    if (banned[j] || stat_[j] == ColStat::BASIC ||
                        lower_[j] == upper_[j])
                        continue;
                    double abar = sigma * arow[j];
                    if (!eligible(j, abar)) continue;
                    double ratio = d[j] / abar;
                    if (bland) {
                        // Exact smallest ratio, smallest column index: finite
                        // by the classic argument.
                        if (ratio <= strict_min + 1e-12) {
                            enter = j;
                            best_piv = abar;
                            break;
                        }
                        continue;
                    }
                    if (ratio > theta_rel) continue;
                    if (enter < 0 || std::abs(abar) > std::abs(best_piv)) {
                        enter = j;
                        best_piv = abar;
                    }
                }
                if (enter < 0) {
                    // Only sub-floor or barred candidates remain: the verdict
                    // is unreliable until the inverse is rebuilt, and
                    // unreliable for this method if it persists afterwards.
                    if (rejected_small || !banned_list.empty()) {
                        if (since_refactor_ == 0 || !rebuild_inverse())
                            return LpStatus::ITER_LIMIT;
                        recompute_basics();
                        refresh_duals();
                        redo_row = true;
                        break;
                    }
                    return LpStatus::INFEASIBLE;
                }

                ftran(enter, alpha);
                double alpha_inf = 0.0;
                for (int i = 0; i < m_; ++i)
                    alpha_inf = std::max(alpha_inf, std::abs(alpha[i]));
                bool unusable = std::abs(alpha[leave] - arow[enter]) >
                                    1e-7 * (1.0 + std::abs(arow[enter])) ||
                                std::abs(alpha[leave]) <
                                    std::max(kPivotTol, 1e-10 * alpha_inf);
                if (!unusable) break;
                if (since_refactor_ != 0) {
                    if (!rebuild_inverse()) return LpStatus::ITER_LIMIT;
                    recompute_basics();
                    refresh_duals();
                    redo_row = true;
                    break;
                }
                banned[enter] = 1;
                banned_list.push_back(enter);
            }
            if (redo_row) continue;

            double step = (xb_[leave] - target) / alpha[leave];
            double theta = d[enter] / arow[enter];
            // Dual progress per pivot is theta times the leaving violation;
            // a run of pivots without it is the cycling signature.
            if (theta < 1e-12) {
                if (++degen_streak > 200) bland = true;
            } else {
                degen_streak = 0;
                bland = false;
            }
            int leave_col = basic_[leave];
            for (int j = 0; j < n_total_; ++j) {
                if (stat_[j] == ColStat::BASIC || arow[j] == 0.0) continue;
                d[j] -= theta * arow[j];
            }
            d[leave_col] = -theta;
            d[enter] = 0.0;

            double enter_val = nonbasic_value(enter) + step;
            for (int i = 0; i < m_; ++i)
                if (alpha[i] != 0.0) xb_[i] -= step * alpha[i];
            pivot(leave, enter, alpha);
            stat_[leave_col] = sigma > 0.0 ? ColStat::AT_UPPER : ColStat::AT_LOWER;
            xb_[leave] = enter_val;
        }
        return LpStatus::ITER_LIMIT;
    }

    int m_ = 0;
    int n_struct_ = 0;
    int n_total_ = 0;
    double min_sign_ = 1.0;
    std::vector<std::vector<std::pair<int, double>>> cols_;
    std::vector<double> lower_, upper_, cost_, rhs_;
    std::vector<double> binv_;
    std::vector<int> basic_;
    std::vector<ColStat> stat_;
    std::vector<int> pos_;
    std::vector<double> xb_;
    long iterations_ = 0;
    long rebuilds_ = 0;
    int since_refactor_ = 0;
};

}  // namespace droneplan::milp::detail

#endif  // DRONEPLAN_MILP_SIMPLEX_HPP
