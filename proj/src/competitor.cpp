#include "bransport/competitor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bransport/errors.hpp"

namespace bransport {

int CellSide::cell_index(const Point& p) const {
    for (std::size_t i = 0; i < balls.size(); ++i)
        if (dist(p, balls[i].center) < balls[i].radius) return static_cast<int>(i);
    return -1;
}

double CellSide::cell_mass(const DiscreteMeasure& mu, int i) const {
    double s = 0;
    for (const auto& a : mu.atoms())
        if (cell_index(a.x) == i) s += a.w;
    return s;
}

double CellSide::outside_mass(const DiscreteMeasure& mu) const {
    double s = 0;
    for (const auto& a : mu.atoms())
        if (cell_index(a.x) < 0) s += a.w;
    return s;
}

namespace {

CellSide build_side(const DiscreteMeasure& mu, double alpha, double eps_bar) {
    CellSide side;
    side.limit_marginal = mu;
    BallCover cover = ball_cover(mu, alpha, std::pow(eps_bar, alpha));
    // Retain the minimal prefix (largest covered mass first) with mass
    // > 1 - eps_bar of the total.
    std::vector<Ball> balls = cover.balls;
    std::stable_sort(balls.begin(), balls.end(), [](const Ball& a, const Ball& b) {
        if (a.covered_mass != b.covered_mass) return a.covered_mass > b.covered_mass;
        return lex_less(a.center, b.center);
    });
    double target = (1.0 - eps_bar) * mu.total();
    double acc = 0;
    for (const Ball& b : balls) {
        if (acc > target) break;
        side.balls.push_back(b);
        acc += b.covered_mass;
    }
    if (acc <= target && !balls.empty() && side.balls.size() < balls.size())
        side.balls = balls;  // degenerate: keep everything
    return side;
}

}  // namespace

CellDecomposition build_cells(const DiscreteMeasure& mu_minus, const DiscreteMeasure& mu_plus,
                              double alpha, double eps_bar) {
    if (!(eps_bar > 0)) throw std::invalid_argument("build_cells: eps_bar > 0 required");
    CellDecomposition cells;
    cells.eps_bar = eps_bar;
    cells.alpha = alpha;
    cells.minus = build_side(mu_minus, alpha, eps_bar);
    cells.plus = build_side(mu_plus, alpha, eps_bar);
    // Retained cells must carry positive limit mass (non-redundant covering).
    for (int i = 0; i < cells.minus.size(); ++i)
        if (!(cells.minus.cell_mass(mu_minus, i) > 0))
            throw CertificateError("build_cells: redundant cell on the minus side");
    for (int j = 0; j < cells.plus.size(); ++j)
        if (!(cells.plus.cell_mass(mu_plus, j) > 0))
            throw CertificateError("build_cells: redundant cell on the plus side");
    return cells;
}

N0Check verify_n0_conditions(const Coupling& pi_n, const Coupling& pi_m,
                             const CellDecomposition& cells, double eps_bar) {
    N0Check out;
    auto fail = [&](const std::string& msg) {
        out.ok = false;
        out.witness = msg;
        return out;
    };
    const double tol = 1e-12;
    for (const Coupling* pi : {&pi_n, &pi_m}) {
        DiscreteMeasure mn = pi->first_marginal();
        DiscreteMeasure mp = pi->second_marginal();
        for (int i = 0; i < cells.minus.size(); ++i) {
            double a = cells.minus.cell_mass(mn, i);
            double b = cells.minus.cell_mass(cells.minus.limit_marginal, i);
            if (a > 2 * b + tol) {
                std::ostringstream os;
                os << "cell mass condition violated on minus cell " << i << ": " << a << " > 2*"
                   << b;
                return fail(os.str());
            }
        }
        for (int j = 0; j < cells.plus.size(); ++j) {
            double a = cells.plus.cell_mass(mp, j);
            double b = cells.plus.cell_mass(cells.plus.limit_marginal, j);
            if (a > 2 * b + tol) {
                std::ostringstream os;
                os << "cell mass condition violated on plus cell " << j << ": " << a << " > 2*"
                   << b;
                return fail(os.str());
            }
        }
        if (cells.minus.outside_mass(mn) > 2 * eps_bar + tol)
            return fail("outside mass condition violated on the minus side");
        if (cells.plus.outside_mass(mp) > 2 * eps_bar + tol)
            return fail("outside mass condition violated on the plus side");
    }
    int Nm = cells.minus.size(), Np = cells.plus.size();
    if (Nm > 0 && Np > 0) {
        double thresh = eps_bar / (static_cast<double>(Nm) * static_cast<double>(Np));
        auto block_mass = [&](const Coupling& pi, int i, int j) {
            double s = 0;
            for (const auto& a : pi.atoms())
                if (cells.minus.cell_index(a.src) == i && cells.plus.cell_index(a.dst) == j)
                    s += a.mass;
            return s;
        };
        for (int i = 0; i < Nm; ++i) {
            for (int j = 0; j < Np; ++j) {
                double d = std::fabs(block_mass(pi_n, i, j) - block_mass(pi_m, i, j));
                if (d > thresh + tol) {
                    std::ostringstream os;
                    os << "block discrepancy condition violated at (" << i << "," << j
                       << "): " << d << " > " << thresh;
                    return fail(os.str());
                }
            }
        }
    }
    return out;
}

SplitPlan split_plan(const TrafficPlan& p, const CellDecomposition& cells,
                     const TrafficPlan& counterpart) {
    SplitPlan out;
    std::map<BlockKey, std::vector<Atom>> raw;
    std::vector<Atom> outside;
    for (const Atom& a : p.atoms()) {
        int i = cells.minus.cell_index(a.curve.start());
        int j = cells.plus.cell_index(a.curve.end());
        if (i >= 0 && j >= 0)
            raw[{i, j}].push_back(a);
        else
            outside.push_back(a);
    }
    std::map<BlockKey, double> counter_mass;
    for (const Atom& a : counterpart.atoms()) {
        int i = cells.minus.cell_index(a.curve.start());
        int j = cells.plus.cell_index(a.curve.end());
        if (i >= 0 && j >= 0) counter_mass[{i, j}] += a.mass;
    }
    std::vector<Atom> res1_atoms;
    for (auto& [key, atoms] : raw) {
        double own = 0;
        for (const Atom& a : atoms) own += a.mass;
        out.raw_mass[key] = own;
        double counter = counter_mass.count(key) ? counter_mass[key] : 0.0;
        double factor = own > 0 ? std::min(1.0, counter / own) : 1.0;
        out.factors[key] = factor;
        if (factor > 0) {
            std::vector<Atom> scaled = atoms;
            for (Atom& a : scaled) a.mass *= factor;
            out.blocks[key] = TrafficPlan(std::move(scaled), p.snap_tol(), p.domain_radius());
        }
        if (factor < 1) {
            for (const Atom& a : atoms) res1_atoms.push_back({a.curve, a.mass * (1 - factor)});
        }
    }
    if (!res1_atoms.empty())
        out.res1 = TrafficPlan(std::move(res1_atoms), p.snap_tol(), p.domain_radius());
    if (!outside.empty())
        out.res2 = TrafficPlan(std::move(outside), p.snap_tol(), p.domain_radius());
    return out;
}

double SplitPlan::residual_mass() const { return res1.total_mass() + res2.total_mass(); }

namespace {

// Coupling between two equal-mass measures: identity when they coincide
// (zero-length connections), product otherwise.
Coupling coupling_between(const DiscreteMeasure& a, const DiscreteMeasure& b) {
    if (a.approx_equal(b, 1e-9, 1e-12)) return diagonal_coupling(a);
    return product_coupling(a, b);
}

}  // namespace

Connections build_connections(const SplitPlan& split_n, const SplitPlan& split_m,
                              const CellDecomposition& cells, double alpha) {
    Connections out;
    // Common block keys with positive rescaled mass on both sides.
    std::vector<BlockKey> keys;
    for (const auto& [key, plan] : split_n.blocks)
        if (split_m.blocks.count(key)) keys.push_back(key);

    const double mass_tol = 1e-9;
    for (const BlockKey& key : keys) {
        const TrafficPlan& bn = split_n.blocks.at(key);
        const TrafficPlan& bm = split_m.blocks.at(key);
        if (std::fabs(bn.total_mass() - bm.total_mass()) > mass_tol) {
            std::ostringstream os;
            os << "build_connections: rescaled block mass mismatch at (" << key.first << ","
               << key.second << ")";
            throw std::invalid_argument(os.str());
        }
        if (coupling_of(bn).approx_equal(coupling_of(bm), 1e-9, 1e-12)) out.trivial.insert(key);
    }

    // Initial connections, one mailing connector per minus ball.
    for (int i = 0; i < cells.minus.size(); ++i) {
        std::vector<BlockKey> row;
        for (const BlockKey& key : keys)
            if (key.first == i) row.push_back(key);
        if (row.empty()) continue;
        Coupling pii;
        std::vector<Coupling> parts;
        bool all_trivial = true;
        for (const BlockKey& key : row) {
            Coupling part = coupling_between(irrigating_measure(split_n.blocks.at(key)),
                                             irrigating_measure(split_m.blocks.at(key)));
            pii = pii + part;
            parts.push_back(part);
            if (!out.trivial.count(key)) all_trivial = false;
        }
        TrafficPlan PIi;
        if (all_trivial) {
            PIi = TrafficPlan::constant(pii.first_marginal());
        } else {
            ConnectorReport rep = mailing_connector(pii, alpha);
            PIi = rep.plan;
        }
        std::vector<TrafficPlan> pieces = decompose_by_couplings(PIi, parts);
        for (std::size_t k = 0; k < row.size(); ++k) out.PI[row[k]] = pieces[k];
        out.energy_PI += alpha_energy(PIi, alpha);
    }

    // Final connections through the plus ball centers, per plus ball.
    for (int j = 0; j < cells.plus.size(); ++j) {
        std::vector<BlockKey> col;
        for (const BlockKey& key : keys)
            if (key.second == j && !out.trivial.count(key)) col.push_back(key);
        // Trivial blocks connect by constants.
        for (const BlockKey& key : keys) {
            if (key.second != j || !out.trivial.count(key)) continue;
            DiscreteMeasure mu = irrigated_measure(split_m.blocks.at(key));
            out.PII[key] = TrafficPlan::constant(mu);
            out.PIII[key] = TrafficPlan::constant(irrigated_measure(split_n.blocks.at(key)));
        }
        if (col.empty()) continue;
        const Point& xj = cells.plus.balls[static_cast<std::size_t>(j)].center;
        DiscreteMeasure Aj, Bj;
        std::vector<Coupling> parts2, parts3;
        for (const BlockKey& key : col) {
            DiscreteMeasure mm = irrigated_measure(split_m.blocks.at(key));
            DiscreteMeasure mn = irrigated_measure(split_n.blocks.at(key));
            Aj = Aj + mm;
            Bj = Bj + mn;
            parts2.push_back(product_coupling(mm, DiscreteMeasure::dirac(xj, mm.total())));
            parts3.push_back(product_coupling(DiscreteMeasure::dirac(xj, mn.total()), mn));
        }
        ConnectorReport repII = irrigate_from_point(Aj, xj, alpha);
        TrafficPlan PIIj = repII.plan.reversed();
        ConnectorReport repIII = irrigate_from_point(Bj, xj, alpha);
        std::vector<TrafficPlan> piecesII = decompose_by_couplings(PIIj, parts2);
        std::vector<TrafficPlan> piecesIII = decompose_by_couplings(repIII.plan, parts3);
        for (std::size_t k = 0; k < col.size(); ++k) {
            out.PII[col[k]] = piecesII[k];
            out.PIII[col[k]] = piecesIII[k];
        }
        out.energy_PII += alpha_energy(PIIj, alpha);
        out.energy_PIII += alpha_energy(repIII.plan, alpha);
    }
    return out;
}

ResidualConnectors build_residual_connectors(const SplitPlan& split_n, const SplitPlan& split_m,
                                             double alpha, const Point& center) {
    ResidualConnectors out;
    TrafficPlan rn = split_n.residual();
    TrafficPlan rm = split_m.residual();
    if (rn.empty() && rm.empty()) return out;
    if (rn.empty() != rm.empty())
        throw std::invalid_argument("residual connectors: one-sided residual");
    Coupling head = coupling_between(irrigating_measure(rn), irrigating_measure(rm));
    ConnectorReport repI = mailing_connector(head, alpha);
    out.PIres = repI.plan;
    ConnectorReport repII = irrigate_from_point(irrigated_measure(rm), center, alpha);
    out.PIIres = repII.plan.reversed();
    ConnectorReport repIII = irrigate_from_point(irrigated_measure(rn), center, alpha);
    out.PIIIres = repIII.plan;
    out.energy = alpha_energy(out.PIres, alpha) + alpha_energy(out.PIIres, alpha) +
                 alpha_energy(out.PIIIres, alpha);
    return out;
}

CompetitorBundle assemble_competitor(const Coupling& pi_n, const TrafficPlan& p_m,
                                     const SplitPlan& split_n, const SplitPlan& split_m,
                                     const CellDecomposition& cells, const Connections& conn,
                                     const ResidualConnectors& res, double alpha,
                                     double domain_diam) {
    CompetitorBundle out;
    out.eps_bar = cells.eps_bar;
    TrafficPlan comp, P1, P2;
    for (const auto& [key, PIij] : conn.PI) {
        const TrafficPlan& block_n = split_n.blocks.at(key);
        const TrafficPlan& block_m = split_m.blocks.at(key);
        TrafficPlan p1 = conc_plans(PIij, block_m).plan;
        P1 = P1 + PIij;
        if (conn.trivial.count(key)) {
            std::string diff =
                coupling_of(p1).first_difference(coupling_of(block_n), 1e-9, 1e-12);
            if (!diff.empty())
                throw CertificateError("assemble_competitor: trivial block coupling drifted (" +
                                       diff + ")");
            comp = comp + p1;
            P2 = P2 + TrafficPlan::constant(irrigated_measure(block_m));
        } else {
            TripleConcatResult tc =
                triple_concat(coupling_of(block_n), p1, conn.PII.at(key), conn.PIII.at(key));
            comp = comp + tc.plan;
            P2 = P2 + tc.middle;
        }
    }
    TrafficPlan rn = split_n.residual();
    if (!rn.empty()) {
        TrafficPlan rm = split_m.residual();
        TrafficPlan p1res = conc_plans(res.PIres, rm).plan;
        TripleConcatResult tc = triple_concat(coupling_of(rn), p1res, res.PIIres, res.PIIIres);
        comp = comp + tc.plan;
        P1 = P1 + res.PIres;
        P2 = P2 + tc.middle;
    }
    out.competitor = std::move(comp);
    out.P1 = std::move(P1);
    out.P2 = std::move(P2);
    out.e_P1 = alpha_energy(out.P1, alpha);
    out.e_P2 = alpha_energy(out.P2, alpha);
    out.energy = alpha_energy(out.competitor, alpha);
    (void)p_m;

    std::string diff = coupling_of(out.competitor).first_difference(pi_n, 1e-9, 1e-12);
    if (!diff.empty())
        throw CertificateError("assemble_competitor: output coupling differs from pi_n (" + diff +
                               ")");
    out.coupling_ok = true;

    int d = pi_n.empty() ? 2 : static_cast<int>(pi_n.atoms().front().src.size());
    double C = connector_constant(alpha, d);
    out.eps_budget = 14.0 * C * (1.0 + domain_diam) * std::pow(cells.eps_bar, alpha);
    if (out.e_P1 > out.eps_budget + 1e-9)
        throw CertificateError("assemble_competitor: E(P1) exceeds the eps budget");
    if (out.e_P2 > out.eps_budget + 1e-9)
        throw CertificateError("assemble_competitor: E(P2) exceeds the eps budget");
    return out;
}

CompetitorBundle build_competitor(const Coupling& pi_n, const Coupling& pi_m,
                                  const TrafficPlan& p_m, const Coupling& pi_limit,
                                  double alpha, double eps_bar, double domain_diam) {
    CellDecomposition cells =
        build_cells(pi_limit.first_marginal(), pi_limit.second_marginal(), alpha, eps_bar);
    // Only the coupling of the n side enters the construction: blocks of P_n
    // contribute their couplings and endpoint measures alone. A nominal plan
    // of straight segments carries exactly those.
    std::vector<Atom> n_atoms;
    for (const auto& a : pi_n.atoms()) {
        if (approx_point(a.src, a.dst, 1e-12))
            n_atoms.push_back({PolyCurve::constant(a.src), a.mass});
        else
            n_atoms.push_back({PolyCurve({a.src, a.dst}), a.mass});
    }
    TrafficPlan p_n(n_atoms);
    SplitPlan split_n = split_plan(p_n, cells, p_m);
    SplitPlan split_m = split_plan(p_m, cells, p_n);
    (void)pi_m;
    Connections conn = build_connections(split_n, split_m, cells, alpha);
    int d = pi_n.empty() ? 2 : static_cast<int>(pi_n.atoms().front().src.size());
    ResidualConnectors res = build_residual_connectors(split_n, split_m, alpha, origin(d));
    return assemble_competitor(pi_n, p_m, split_n, split_m, cells, conn, res, alpha,
                               domain_diam);
}

CompetitorBundle build_competitor_auto(const Coupling& pi_n, const Coupling& pi_m,
                                       const TrafficPlan& p_m, const Coupling& pi_limit,
                                       double alpha, double domain_diam, double* eps_bar_used) {
    const double ladder[] = {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.01};
    for (double eps_bar : ladder) {
        CellDecomposition cells;
        try {
            cells = build_cells(pi_limit.first_marginal(), pi_limit.second_marginal(), alpha,
                                eps_bar);
        } catch (const CertificateError&) {
            continue;
        }
        N0Check check = verify_n0_conditions(pi_n, pi_m, cells, eps_bar);
        if (!check.ok) continue;
        if (eps_bar_used) *eps_bar_used = eps_bar;
        return build_competitor(pi_n, pi_m, p_m, pi_limit, alpha, eps_bar, domain_diam);
    }
    throw CertificateError("build_competitor_auto: no eps_bar on the ladder satisfies the n0 conditions");
}

}  // namespace bransport
