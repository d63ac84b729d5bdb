// SPDX-License-Identifier: Apache-2.0
//
// Dense primal-dual path-following interior-point solver for block-diagonal
// Hermitian SDPs, Nesterov-Todd scaling, Mehrotra-style adaptive centering.
// Complex blocks are handled natively; 1x1 blocks double as slack variables.
#include "irsnoma/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>

namespace irsnoma::sdp {

namespace {

double herm_inner(const CMatrix& a, const CMatrix& x) {
    return a.cwiseProduct(x.conjugate()).sum().real();
}

struct StdRow {
    std::vector<Term> terms;
    double b = 0.0;
};

// min sum_b Tr(C_b X_b)  s.t.  sum <A_i, X> = b_i,  X_b PSD
struct StdForm {
    std::vector<int> dims;
    std::vector<CMatrix> c;
    std::vector<StdRow> rows;

    int add_block(int dim) {
        dims.push_back(dim);
        c.emplace_back(CMatrix::Zero(dim, dim));
        return static_cast<int>(dims.size()) - 1;
    }
};

struct IpmOutcome {
    bool converged = false;
    std::vector<CMatrix> x;
    std::vector<double> y;
    double pobj = 0.0;
    double dobj = 0.0;
    double relgap = 1.0;
    double prim_res = 1.0;
    double dual_res = 1.0;
    int iterations = 0;
};

double step_length(const CMatrix& s, const CMatrix& d) {
    if (s.rows() == 1) {
        double sv = s(0, 0).real();
        double dv = d(0, 0).real();
        if (dv >= 0.0) return 1.0;
        return std::min(1.0, -sv / dv);
    }
    Eigen::LLT<CMatrix> llt(s);
    if (llt.info() != Eigen::Success) {
        // Iterates can brush the cone boundary; a vanishing shift keeps the
        // factorization alive and yields the limiting step instead of a lock.
        double shift = 1e-13 * (1.0 + s.cwiseAbs().maxCoeff());
        for (int attempt = 0; attempt < 3 && llt.info() != Eigen::Success; ++attempt) {
            llt.compute(s + shift * CMatrix::Identity(s.rows(), s.cols()));
            shift *= 100.0;
        }
        if (llt.info() != Eigen::Success) return 0.0;
    }
    CMatrix l = llt.matrixL();
    CMatrix y = l.triangularView<Eigen::Lower>().solve(d);
    CMatrix t = l.triangularView<Eigen::Lower>().solve(y.adjoint()).adjoint();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (t + t.adjoint()),
                                              Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues()(0);
    if (lmin >= 0.0) return 1.0;
    return std::min(1.0, -1.0 / lmin);
}

IpmOutcome ipm(const StdForm& sf, double tol_gap, double tol_res, int max_iters) {
    const int nb = static_cast<int>(sf.dims.size());
    const int m = static_cast<int>(sf.rows.size());
    double nu = 0.0;
    for (int d : sf.dims) nu += d;

    IpmOutcome out;
    double bmax = 1.0;
    for (const auto& r : sf.rows) bmax = std::max(bmax, std::abs(r.b));
    double cmax = 1.0;
    for (const auto& c : sf.c) if (c.size() > 0) cmax = std::max(cmax, c.cwiseAbs().maxCoeff());

    const double eta = 10.0 * std::max(1.0, bmax);
    std::vector<CMatrix> x(nb), z(nb);
    for (int b = 0; b < nb; ++b) {
        x[b] = eta * CMatrix::Identity(sf.dims[b], sf.dims[b]);
        z[b] = std::max(1.0, cmax) * CMatrix::Identity(sf.dims[b], sf.dims[b]);
    }
    RVector y = RVector::Zero(m);

    std::vector<CMatrix> w(nb), zinv(nb), rd(nb), g(nb), dz(nb), dx(nb);
    RMatrix schur(m, m);
    RVector rp(m), rhs(m), zi(m), dy(m);
    // per-row, per-block scaled coefficients W A W for the Schur fill
    std::vector<std::vector<CMatrix>> waw(m);
    std::vector<std::vector<int>> row_blocks(m);
    for (int i = 0; i < m; ++i) {
        row_blocks[i].reserve(sf.rows[i].terms.size());
        for (const auto& t : sf.rows[i].terms) row_blocks[i].push_back(t.block);
        waw[i].resize(sf.rows[i].terms.size());
    }
    // block -> position of a row's term, rebuilt per row pair scan
    std::vector<int> block_slot(nb, -1);

    double best_progress = std::numeric_limits<double>::infinity();
    int stalled = 0;
    int lifts = 0;

    for (int iter = 0; iter < max_iters; ++iter) {
        out.iterations = iter + 1;

        double pobj = 0.0;
        for (int b = 0; b < nb; ++b) pobj += herm_inner(sf.c[b], x[b]);
        double dobj = 0.0;
        for (int i = 0; i < m; ++i) dobj += sf.rows[i].b * y(i);

        for (int i = 0; i < m; ++i) {
            double ax = 0.0;
            for (const auto& t : sf.rows[i].terms) ax += herm_inner(t.coeff, x[t.block]);
            rp(i) = sf.rows[i].b - ax;
        }
        for (int b = 0; b < nb; ++b) rd[b] = sf.c[b] - z[b];
        for (int i = 0; i < m; ++i)
            for (const auto& t : sf.rows[i].terms) rd[t.block] -= y(i) * t.coeff;

        double gap = 0.0;
        for (int b = 0; b < nb; ++b) gap += herm_inner(x[b], z[b]);
        double mu = gap / nu;

        out.pobj = pobj;
        out.dobj = dobj;
        out.prim_res = rp.size() ? rp.cwiseAbs().maxCoeff() / (1.0 + bmax) : 0.0;
        out.dual_res = 0.0;
        for (int b = 0; b < nb; ++b)
            out.dual_res = std::max(out.dual_res,
                                    rd[b].cwiseAbs().maxCoeff() / (1.0 + cmax));
        out.relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        if (out.prim_res <= tol_res && out.dual_res <= tol_res && out.relgap <= tol_gap) {
            out.converged = true;
            break;
        }
        double progress = out.prim_res + out.dual_res + out.relgap;
        if (progress < 0.99 * best_progress) {
            best_progress = progress;
            stalled = 0;
        } else if (++stalled >= 8) {
            if (lifts >= 2) break;
            // Near a low-rank optimum the step lengths can collapse while the
            // residuals sit just above tolerance.  Lift both iterates off the
            // cone boundary by a barrier-sized multiple of the identity and
            // keep going; the residual perturbation is of the same order.
            ++lifts;
            stalled = 0;
            best_progress = std::numeric_limits<double>::infinity();
            double xn = 0.0, zn = 0.0;
            for (int b = 0; b < nb; ++b) {
                xn = std::max(xn, x[b].cwiseAbs().maxCoeff());
                zn = std::max(zn, z[b].cwiseAbs().maxCoeff());
            }
            double dxl = mu / (1.0 + zn);
            double dzl = mu / (1.0 + xn);
            for (int b = 0; b < nb; ++b) {
                x[b] += dxl * CMatrix::Identity(sf.dims[b], sf.dims[b]);
                z[b] += dzl * CMatrix::Identity(sf.dims[b], sf.dims[b]);
            }
        }
        if (!std::isfinite(mu) || mu > 1e14) break;
        double xnorm = 0.0;
        for (int b = 0; b < nb; ++b) xnorm = std::max(xnorm, x[b].cwiseAbs().maxCoeff());
        if (xnorm > 1e12 * eta) break;

        // Nesterov-Todd scaling point per block: W Z W = X.
        bool scale_ok = true;
        for (int b = 0; b < nb; ++b) {
            if (sf.dims[b] == 1) {
                double xv = x[b](0, 0).real(), zv = z[b](0, 0).real();
                if (!(xv > 0.0) || !(zv > 0.0)) { scale_ok = false; break; }
                w[b] = CMatrix::Constant(1, 1, std::sqrt(xv / zv));
                zinv[b] = CMatrix::Constant(1, 1, 1.0 / zv);
                continue;
            }
            Eigen::LLT<CMatrix> lltz(z[b]);
            if (lltz.info() != Eigen::Success) { scale_ok = false; break; }
            CMatrix rz = lltz.matrixU();
            CMatrix t = rz * x[b] * rz.adjoint();
            Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (t + t.adjoint()));
            if (es.info() != Eigen::Success) { scale_ok = false; break; }
            CMatrix th = es.eigenvectors() *
                         es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().asDiagonal() *
                         es.eigenvectors().adjoint();
            CMatrix y1 = rz.triangularView<Eigen::Upper>().solve(th);
            w[b] = rz.triangularView<Eigen::Upper>().solve(y1.adjoint()).adjoint();
            w[b] = (0.5 * (w[b] + w[b].adjoint())).eval();
            zinv[b] = lltz.solve(CMatrix::Identity(sf.dims[b], sf.dims[b]));
            zinv[b] = (0.5 * (zinv[b] + zinv[b].adjoint())).eval();
        }
        if (!scale_ok) break;

        for (int j = 0; j < m; ++j) {
            const auto& terms = sf.rows[j].terms;
            for (size_t s = 0; s < terms.size(); ++s) {
                const int b = terms[s].block;
                waw[j][s] = w[b] * terms[s].coeff * w[b];
            }
        }
        for (int j = 0; j < m; ++j) {
            const auto& tj = sf.rows[j].terms;
            for (size_t s = 0; s < tj.size(); ++s) block_slot[tj[s].block] = static_cast<int>(s);
            for (int i = 0; i <= j; ++i) {
                double acc = 0.0;
                for (const auto& t : sf.rows[i].terms) {
                    int slot = block_slot[t.block];
                    if (slot >= 0) acc += herm_inner(t.coeff, waw[j][slot]);
                }
                schur(i, j) = acc;
                schur(j, i) = acc;
            }
            for (size_t s = 0; s < tj.size(); ++s) block_slot[tj[s].block] = -1;
        }
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (const auto& t : sf.rows[i].terms) acc += herm_inner(t.coeff, zinv[t.block]);
            zi(i) = acc;
        }
        // <A_i, W Rd W> pieces reused by both solves
        RVector wrd(m);
        {
            std::vector<CMatrix> h(nb);
            for (int b = 0; b < nb; ++b) h[b] = w[b] * rd[b] * w[b];
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                for (const auto& t : sf.rows[i].terms) acc += herm_inner(t.coeff, h[t.block]);
                wrd(i) = acc;
            }
        }

        Eigen::LDLT<RMatrix> ldlt;
        double ridge = 0.0;
        for (int attempt = 0; attempt < 4; ++attempt) {
            RMatrix sm = schur;
            if (ridge > 0.0) sm.diagonal().array() += ridge;
            ldlt.compute(sm);
            if (ldlt.info() == Eigen::Success) {
                RVector probe = ldlt.solve(RVector::Ones(m));
                if (probe.allFinite()) break;
            }
            ridge = (ridge == 0.0) ? 1e-12 * (1.0 + schur.diagonal().maxCoeff()) : ridge * 100.0;
        }

        auto direction = [&](double sigma_mu, RVector& dy_out) {
            for (int i = 0; i < m; ++i)
                rhs(i) = sf.rows[i].b - sigma_mu * zi(i) + wrd(i);
            dy_out = ldlt.solve(rhs);
            for (int b = 0; b < nb; ++b) dz[b] = rd[b];
            for (int i = 0; i < m; ++i)
                for (const auto& t : sf.rows[i].terms) dz[t.block] -= dy_out(i) * t.coeff;
            for (int b = 0; b < nb; ++b) {
                dx[b] = -x[b] - w[b] * dz[b] * w[b];
                if (sigma_mu != 0.0) dx[b] += sigma_mu * zinv[b];
                dx[b] = (0.5 * (dx[b] + dx[b].adjoint())).eval();
            }
        };

        direction(0.0, dy);
        double ap = 1.0, ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, step_length(x[b], dx[b]));
            ad = std::min(ad, step_length(z[b], dz[b]));
        }
        double gap_aff = 0.0;
        for (int b = 0; b < nb; ++b)
            gap_aff += herm_inner(x[b] + 0.98 * ap * dx[b], z[b] + 0.98 * ad * dz[b]);
        gap_aff = std::max(gap_aff, 0.0);
        double sigma = std::pow(gap_aff / std::max(gap, 1e-300), 3.0);
        sigma = std::clamp(sigma, 1e-6, 0.9999);

        direction(sigma * mu, dy);
        ap = 1.0;
        ad = 1.0;
        for (int b = 0; b < nb; ++b) {
            ap = std::min(ap, step_length(x[b], dx[b]));
            ad = std::min(ad, step_length(z[b], dz[b]));
        }
        ap *= 0.98;
        ad *= 0.98;
        if (ap < 1e-7) {
            // Primal iterate locked on the boundary; restore a sliver of
            // interior so the next scaling and step computations can move.
            double xmax = 0.0;
            for (int b = 0; b < nb; ++b) xmax = std::max(xmax, x[b].cwiseAbs().maxCoeff());
            double bump = 1e-12 * (1.0 + xmax);
            for (int b = 0; b < nb; ++b)
                x[b] += bump * CMatrix::Identity(sf.dims[b], sf.dims[b]);
        }
        for (int b = 0; b < nb; ++b) {
            x[b] += ap * dx[b];
            x[b] = (0.5 * (x[b] + x[b].adjoint())).eval();
            z[b] += ad * dz[b];
            z[b] = (0.5 * (z[b] + z[b].adjoint())).eval();
        }
        y += ad * dy;
        if (std::getenv("SDP_DEBUG"))
            std::fprintf(stderr, "it=%3d pres=%.2e dres=%.2e relgap=%.2e sigma=%.2e ap=%.2e ad=%.2e ridge=%.1e\n",
                         iter, out.prim_res, out.dual_res, out.relgap, sigma, ap, ad, ridge);
    }

    out.x = std::move(x);
    out.y.assign(y.data(), y.data() + m);
    return out;
}

// Normalized copy of the user's constraints plus quick disposition of rows
// with an all-zero coefficient side.
struct Prepared {
    bool trivially_infeasible = false;
    std::vector<Constraint> rows;   // scaled, nonzero lhs
    double rmax_scaled = 0.0;
};

CMatrix hermitianized(const CMatrix& a, const char* who) {
    if (a.rows() != a.cols()) throw std::invalid_argument(std::string(who) + ": coefficient not square");
    double scale = std::max(a.cwiseAbs().maxCoeff(), 1.0);
    if ((a - a.adjoint()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::invalid_argument(std::string(who) + ": coefficient not Hermitian");
    return 0.5 * (a + a.adjoint());
}

void validate(const Problem& p) {
    if (p.block_dims.empty()) throw std::invalid_argument("sdp: problem has no blocks");
    for (int d : p.block_dims) {
        if (d < 1) throw std::invalid_argument("sdp: block dimension must be >= 1");
        if (d > kMaxBlockDim) throw std::invalid_argument("sdp: block dimension exceeds cap");
    }
    auto check_terms = [&](const std::vector<Term>& ts) {
        for (const auto& t : ts) {
            if (t.block < 0 || t.block >= static_cast<int>(p.block_dims.size()))
                throw std::invalid_argument("sdp: term references unknown block");
            if (t.coeff.rows() != p.block_dims[t.block])
                throw std::invalid_argument("sdp: term dimension mismatch");
        }
    };
    check_terms(p.objective);
    for (const auto& c : p.constraints) {
        check_terms(c.terms);
        if (!std::isfinite(c.rhs)) throw std::invalid_argument("sdp: constraint rhs not finite");
    }
}

Prepared prepare(const Problem& p) {
    Prepared out;
    for (const auto& c : p.constraints) {
        double anorm = 0.0;
        Constraint row;
        row.rel = c.rel;
        for (const auto& t : c.terms) {
            CMatrix h = hermitianized(t.coeff, "sdp constraint");
            anorm = std::hypot(anorm, h.norm());
            row.terms.push_back({t.block, std::move(h)});
        }
        if (anorm == 0.0) {
            bool ok = (c.rel == Relation::Equal)     ? std::abs(c.rhs) <= kFeasMargin
                      : (c.rel == Relation::LessEq)  ? c.rhs >= -kFeasMargin
                                                     : c.rhs <= kFeasMargin;
            if (!ok) out.trivially_infeasible = true;
            continue;
        }
        double d = std::max(anorm, std::abs(c.rhs));
        for (auto& t : row.terms) t.coeff /= d;
        row.rhs = c.rhs / d;
        out.rmax_scaled = std::max(out.rmax_scaled, std::abs(row.rhs));
        out.rows.push_back(std::move(row));
    }
    return out;
}

// Margin problem: maximize the worst inequality slack t, bounded above.
// Rows are pre-normalized, so t >= -1 always holds at X = 0; writing
// t = t_x - kMarginShift with t_x >= 0 keeps the margin variable interior
// on both primal and dual sides (a tp - tm split would pin the dual slacks
// of the pair to zero and stall the interior-point iteration).
constexpr double kMarginShift = 2.0;
constexpr double kMarginCap = 2.0;  // upper bound on the reported t

struct MarginForm {
    StdForm sf;
    int tx = -1;
    int n_orig = 0;
};

MarginForm build_margin(const Problem& p, const Prepared& prep) {
    MarginForm mf;
    mf.n_orig = static_cast<int>(p.block_dims.size());
    for (int d : p.block_dims) mf.sf.add_block(d);
    mf.tx = mf.sf.add_block(1);
    int cap_slack = mf.sf.add_block(1);
    mf.sf.c[mf.tx](0, 0) = -1.0;  // min(-t_x) == max t

    const CMatrix one = CMatrix::Constant(1, 1, 1.0);
    for (const auto& row : prep.rows) {
        StdRow r;
        r.terms = row.terms;
        r.b = row.rhs;
        if (row.rel != Relation::Equal) {
            double sgn = (row.rel == Relation::GreaterEq) ? -1.0 : 1.0;
            r.terms.push_back({mf.tx, sgn * one});
            int s = mf.sf.add_block(1);
            r.terms.push_back({s, sgn * one});
            r.b += sgn * kMarginShift;
        }
        mf.sf.rows.push_back(std::move(r));
    }
    StdRow cap;
    cap.terms.push_back({mf.tx, one});
    cap.terms.push_back({cap_slack, one});
    cap.b = kMarginShift + kMarginCap;
    mf.sf.rows.push_back(std::move(cap));
    return mf;
}

}  // namespace

int Problem::add_block(int dim) {
    block_dims.push_back(dim);
    return static_cast<int>(block_dims.size()) - 1;
}

void Problem::add_objective(int block, CMatrix coeff) {
    objective.push_back({block, std::move(coeff)});
}

void Problem::add_constraint(Constraint c) { constraints.push_back(std::move(c)); }

void Problem::add_trace_constraint(int block, CMatrix coeff, Relation rel, double rhs) {
    Constraint c;
    c.terms.push_back({block, std::move(coeff)});
    c.rel = rel;
    c.rhs = rhs;
    constraints.push_back(std::move(c));
}

void Problem::fix_diagonal(int block, int index, double value) {
    if (block < 0 || block >= static_cast<int>(block_dims.size()))
        throw std::invalid_argument("fix_diagonal: unknown block");
    if (index < 0 || index >= block_dims[block])
        throw std::invalid_argument("fix_diagonal: index out of range");
    CMatrix e = CMatrix::Zero(block_dims[block], block_dims[block]);
    e(index, index) = 1.0;
    add_trace_constraint(block, std::move(e), Relation::Equal, value);
}

Solution solve_feasibility(const Problem& p, double tolerance) {
    validate(p);
    Prepared prep = prepare(p);
    Solution sol;
    if (prep.trivially_infeasible) {
        sol.status = Status::Infeasible;
        sol.feasibility_margin = -1.0;
        return sol;
    }
    MarginForm mf = build_margin(p, prep);
    IpmOutcome r = ipm(mf.sf, tolerance, std::min(tolerance, 1e-9), kMaxIterations);
    sol.iterations = r.iterations;
    if (!r.converged) {
        sol.status = Status::NumericalFailure;
        return sol;
    }
    double tstar = r.x[mf.tx](0, 0).real() - kMarginShift;
    sol.feasibility_margin = tstar;
    double threshold = kFeasMargin * (1.0 + prep.rmax_scaled);
    if (tstar >= -threshold) {
        sol.status = Status::Feasible;
        sol.blocks.assign(r.x.begin(), r.x.begin() + mf.n_orig);
    } else {
        sol.status = Status::Infeasible;
    }
    return sol;
}

Status check_feasible(const Problem& p, double tolerance) {
    return solve_feasibility(p, tolerance).status;
}

Solution solve(const Problem& p, double tolerance) {
    Solution feas = solve_feasibility(p, std::min(tolerance, 1e-9));
    if (feas.status != Status::Feasible) return feas;

    validate(p);
    Prepared prep = prepare(p);
    StdForm sf;
    for (int d : p.block_dims) sf.add_block(d);
    const int n_orig = static_cast<int>(p.block_dims.size());

    double csign = (p.sense == Sense::Max) ? -1.0 : 1.0;
    double cscale = 0.0;
    for (const auto& t : p.objective) cscale = std::max(cscale, t.coeff.cwiseAbs().maxCoeff());
    if (cscale == 0.0) cscale = 1.0;
    for (const auto& t : p.objective)
        sf.c[t.block] += (csign / cscale) * hermitianized(t.coeff, "sdp objective");

    const CMatrix one = CMatrix::Constant(1, 1, 1.0);
    for (const auto& row : prep.rows) {
        StdRow r;
        r.terms = row.terms;
        r.b = row.rhs;
        if (row.rel != Relation::Equal) {
            int s = sf.add_block(1);
            sf.c.back() = CMatrix::Zero(1, 1);
            double sgn = (row.rel == Relation::GreaterEq) ? -1.0 : 1.0;
            r.terms.push_back({s, sgn * one});
        }
        sf.rows.push_back(std::move(r));
    }

    IpmOutcome r = ipm(sf, tolerance, std::min(tolerance, 1e-9), kMaxIterations);
    Solution sol;
    sol.iterations = r.iterations;
    sol.feasibility_margin = feas.feasibility_margin;
    sol.duality_gap = r.relgap;
    if (r.converged) {
        sol.status = Status::Optimal;
    } else if (r.prim_res <= 1e-7 && r.dual_res <= 1e-7 && r.relgap <= 1e-5) {
        sol.status = Status::Feasible;
    } else {
        sol.status = Status::NumericalFailure;
        return sol;
    }
    sol.blocks.assign(r.x.begin(), r.x.begin() + n_orig);
    sol.objective_value = 0.0;
    for (const auto& t : p.objective)
        sol.objective_value += herm_inner(hermitianized(t.coeff, "sdp objective"), sol.blocks[t.block]);
    return sol;
}

}  // namespace irsnoma::sdp
