#include "msglmb/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace msglmb {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Shortest-augmenting-path assignment for rows <= cols. Returns the
// row-to-column map or nullopt when some row has no reachable column.
std::optional<std::vector<int>> sap_solve(const Eigen::MatrixXd& c) {
    const int n = static_cast<int>(c.rows());
    const int m = static_cast<int>(c.cols());
    if (n == 0) return std::vector<int>{};
    if (n > m) return std::nullopt;

    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(m + 1, kInf);
        std::vector<char> used(m + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = -1;
            double delta = kInf;
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = c(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if (!(delta < kInf)) return std::nullopt;  // row i unreachable
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else if (minv[j] < kInf) {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= m; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    return row_to_col;
}

double assignment_cost(const Eigen::MatrixXd& c, const std::vector<int>& rtc) {
    double s = 0.0;
    for (int i = 0; i < static_cast<int>(rtc.size()); ++i) s += c(i, rtc[i]);
    return s;
}

std::optional<double> min_cost(const Eigen::MatrixXd& c) {
    const auto sol = sap_solve(c);
    if (!sol) return std::nullopt;
    return assignment_cost(c, *sol);
}

}  // namespace

Assignment munkres(const CostMatrix& c) {
    const auto base = sap_solve(c);
    if (!base) throw Infeasible{};
    const double best = assignment_cost(c, *base);
    const double tol = 1e-9 * (1.0 + std::abs(best));

    const int n = static_cast<int>(c.rows());
    const int m = static_cast<int>(c.cols());

    // Fix columns row by row, smallest column first, keeping the residual
    // problem optimal. Yields the lexicographically smallest optimum.
    std::vector<int> fixed(n, -1);
    std::vector<char> col_used(m, 0);
    double fixed_sum = 0.0;
    for (int i = 0; i < n; ++i) {
        const int rows_left = n - i - 1;
        for (int j = 0; j < m; ++j) {
            if (col_used[j] || !(c(i, j) < kInf)) continue;
            Eigen::MatrixXd sub(rows_left, 0);
            std::vector<int> free_cols;
            for (int jj = 0; jj < m; ++jj)
                if (!col_used[jj] && jj != j) free_cols.push_back(jj);
            sub.resize(rows_left, static_cast<int>(free_cols.size()));
            for (int r = 0; r < rows_left; ++r)
                for (int k = 0; k < static_cast<int>(free_cols.size()); ++k)
                    sub(r, k) = c(i + 1 + r, free_cols[k]);
            const auto rest = min_cost(sub);
            if (rest && fixed_sum + c(i, j) + *rest <= best + tol) {
                fixed[i] = j;
                col_used[j] = 1;
                fixed_sum += c(i, j);
                break;
            }
        }
    }
    return Assignment{fixed, assignment_cost(c, fixed)};
}

MurtyIterator::MurtyIterator(CostMatrix c) : cost_(std::move(c)) {
    Node root;
    if (solve_node(root)) queue_.push(std::move(root));
}

bool MurtyIterator::solve_node(Node& n) const {
    const int rows = static_cast<int>(cost_.rows());
    const int cols = static_cast<int>(cost_.cols());

    std::vector<int> full(rows, -1);
    std::vector<char> col_taken(cols, 0);
    std::vector<char> row_forced(rows, 0);
    for (const auto& [r, cidx] : n.forced) {
        if (!(cost_(r, cidx) < kInf)) return false;
        full[r] = cidx;
        col_taken[cidx] = 1;
        row_forced[r] = 1;
    }

    std::vector<int> free_rows, free_cols;
    for (int r = 0; r < rows; ++r)
        if (!row_forced[r]) free_rows.push_back(r);
    for (int j = 0; j < cols; ++j)
        if (!col_taken[j]) free_cols.push_back(j);

    Eigen::MatrixXd sub(static_cast<int>(free_rows.size()),
                        static_cast<int>(free_cols.size()));
    for (int r = 0; r < sub.rows(); ++r)
        for (int j = 0; j < sub.cols(); ++j)
            sub(r, j) = cost_(free_rows[r], free_cols[j]);
    for (const auto& [r, cidx] : n.forbidden) {
        const auto rit = std::find(free_rows.begin(), free_rows.end(), r);
        const auto cit = std::find(free_cols.begin(), free_cols.end(), cidx);
        if (rit != free_rows.end() && cit != free_cols.end())
            sub(rit - free_rows.begin(), cit - free_cols.begin()) = kInf;
    }

    const auto sol = sap_solve(sub);
    if (!sol) return false;
    for (int r = 0; r < sub.rows(); ++r) full[free_rows[r]] = free_cols[(*sol)[r]];
    n.solution.row_to_col = std::move(full);
    n.solution.cost = assignment_cost(cost_, n.solution.row_to_col);
    return true;
}

Assignment MurtyIterator::get_next() {
    Node node = queue_.top();
    queue_.pop();

    // Partition the remaining solution space around the yielded
    // assignment so no assignment is enumerated twice.
    std::vector<char> row_forced(cost_.rows(), 0);
    for (const auto& [r, cidx] : node.forced) row_forced[r] = 1;

    Node child;
    child.forced = node.forced;
    child.forbidden = node.forbidden;
    for (int r = 0; r < static_cast<int>(cost_.rows()); ++r) {
        if (row_forced[r]) continue;
        Node branch = child;
        branch.forbidden.emplace_back(r, node.solution.row_to_col[r]);
        if (solve_node(branch)) queue_.push(std::move(branch));
        child.forced.emplace_back(r, node.solution.row_to_col[r]);
    }
    return node.solution;
}

std::vector<Selection> k_min_sum(const std::vector<std::vector<double>>& arrays,
                                 int k) {
    if (k < 1) throw std::invalid_argument("k_min_sum: K must be >= 1");
    for (const auto& a : arrays)
        if (a.empty()) throw EmptyArray{};
    if (arrays.empty()) return {};

    const auto truncate = [k](std::vector<Selection>& sels) {
        std::sort(sels.begin(), sels.end(), [](const Selection& a, const Selection& b) {
            if (a.sum != b.sum) return a.sum < b.sum;
            return a.indices < b.indices;
        });
        if (static_cast<int>(sels.size()) > k) sels.resize(k);
    };

    std::vector<Selection> top;
    for (int i = 0; i < static_cast<int>(arrays[0].size()); ++i)
        top.push_back(Selection{{i}, arrays[0][i]});
    truncate(top);

    for (std::size_t ai = 1; ai < arrays.size(); ++ai) {
        std::vector<Selection> candidates;
        candidates.reserve(top.size() * arrays[ai].size());
        for (const auto& sel : top) {
            for (int i = 0; i < static_cast<int>(arrays[ai].size()); ++i) {
                Selection ext = sel;
                ext.indices.push_back(i);
                ext.sum += arrays[ai][i];
                candidates.push_back(std::move(ext));
            }
        }
        truncate(candidates);
        top = std::move(candidates);
    }
    return top;
}

}  // namespace msglmb
