#pragma once

#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace msglmb {

/// Cost matrix with entries in [0, +inf]. +inf marks a forbidden pairing.
/// Tracker-shaped matrices have cols = M + 2*rows with infinite entries
/// off the missed/died diagonals; the solvers accept any rows <= cols
/// matrix that admits a finite assignment.
using CostMatrix = Eigen::MatrixXd;

/// A valid data association: each row assigned exactly one column, each
/// column used at most once, total cost finite.
struct Assignment {
    std::vector<int> row_to_col;
    double cost = 0.0;

    bool operator==(const Assignment& o) const { return row_to_col == o.row_to_col; }
};

struct Infeasible : std::runtime_error {
    Infeasible() : std::runtime_error("no finite-cost assignment exists") {}
};

/// Minimum-cost assignment; ties broken by lexicographically smallest
/// row_to_col. Throws Infeasible when no finite assignment exists.
Assignment munkres(const CostMatrix& c);

/// Enumerates valid assignments in nondecreasing total cost, exhausting
/// exactly the finite-cost ones. Classic Murty partitioning with a
/// shortest-augmenting-path solver as the subroutine.
class MurtyIterator {
public:
    explicit MurtyIterator(CostMatrix c);

    bool has_next() const { return !queue_.empty(); }
    /// Contract violation if called when has_next() is false.
    Assignment get_next();

private:
    struct Node {
        std::vector<std::pair<int, int>> forced;
        std::vector<std::pair<int, int>> forbidden;
        Assignment solution;
    };
    struct NodeOrder {
        bool operator()(const Node& a, const Node& b) const {
            if (a.solution.cost != b.solution.cost)
                return a.solution.cost > b.solution.cost;
            return a.solution.row_to_col > b.solution.row_to_col;
        }
    };

    bool solve_node(Node& n) const;

    CostMatrix cost_;
    std::priority_queue<Node, std::vector<Node>, NodeOrder> queue_;
};

/// One index into each input array plus the sum of the selected values.
struct Selection {
    std::vector<int> indices;
    double sum = 0.0;
};

struct EmptyArray : std::runtime_error {
    EmptyArray() : std::runtime_error("k_min_sum input array is empty") {}
};

/// Top-K selections with the smallest sums, via recursive
/// extend-and-truncate. Returns min(K, product of lengths) selections in
/// nondecreasing sum; equal sums ordered by lexicographic indices.
std::vector<Selection> k_min_sum(const std::vector<std::vector<double>>& arrays,
                                 int k);

}  // namespace msglmb
