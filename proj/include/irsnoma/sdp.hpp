// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <limits>
#include <vector>

#include "irsnoma/core.hpp"

namespace irsnoma::sdp {

inline constexpr int kMaxBlockDim = 256;
inline constexpr int kMaxIterations = 200;
// A point is accepted as feasible when every scaled residual clears this.
inline constexpr double kFeasMargin = 1e-7;

enum class Sense { Max, Min };
enum class Relation { LessEq, GreaterEq, Equal };

enum class Status { Optimal, Feasible, Infeasible, NumericalFailure };

// One Hermitian coefficient acting on a variable block.
struct Term {
    int block = 0;
    CMatrix coeff;
};

// sum_terms Tr(coeff * X_block)  <relation>  rhs
struct Constraint {
    std::vector<Term> terms;
    Relation rel = Relation::Equal;
    double rhs = 0.0;
};

// Block-diagonal Hermitian SDP:
//   max/min sum_b Tr(C_b X_b)  s.t. linear trace constraints, X_b PSD.
struct Problem {
    std::vector<int> block_dims;
    Sense sense = Sense::Max;
    std::vector<Term> objective;
    std::vector<Constraint> constraints;

    int add_block(int dim);
    void add_objective(int block, CMatrix coeff);
    void add_constraint(Constraint c);
    void add_trace_constraint(int block, CMatrix coeff, Relation rel, double rhs);
    // Pins a single real diagonal entry of a block.
    void fix_diagonal(int block, int index, double value);
};

struct Solution {
    Status status = Status::NumericalFailure;
    std::vector<CMatrix> blocks;
    double objective_value = std::numeric_limits<double>::quiet_NaN();
    double duality_gap = std::numeric_limits<double>::quiet_NaN();  // relative
    // Worst scaled slack of the margin problem; > 0 means strictly feasible.
    double feasibility_margin = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
};

// Optimizes the problem.  Infeasibility is certified by a phase-I margin
// run before the main solve.
Solution solve(const Problem& p, double tolerance = 1e-8);

// Maximizes the worst constraint slack and classifies the problem as
// Feasible or Infeasible; blocks hold the max-margin point when feasible.
Solution solve_feasibility(const Problem& p, double tolerance = 1e-9);

Status check_feasible(const Problem& p, double tolerance = 1e-9);

}  // namespace irsnoma::sdp
