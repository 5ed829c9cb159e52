#include "bransport/components.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "bransport/errors.hpp"

namespace bransport {

namespace {

SplitNetworkView make_view(const TrafficPlan& p, const OpenSetSpec& u) {
    SplitNetworkView view;
    const Network& net = p.network();
    // Copy alive edges with contiguous ids.
    std::vector<int> remap(net.edges().size(), -1);
    view.verts.resize(static_cast<std::size_t>(net.vertex_count()));
    for (int v = 0; v < net.vertex_count(); ++v)
        view.verts[static_cast<std::size_t>(v)] = net.vertex(v);
    view.removed.assign(view.verts.size(), 0);
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        const auto& ed = net.edges()[e];
        if (!ed.alive) continue;
        remap[e] = static_cast<int>(view.edges.size());
        view.edges.push_back({ed.a, ed.b, ed.len});
        view.mult[remap[e]] = p.multiplicity().at(static_cast<int>(e));
    }
    view.paths.resize(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        for (const EdgeStep& st : p.path(i))
            view.paths[i].push_back({remap[static_cast<std::size_t>(st.edge)], st.forward});

    double tol = p.snap_tol();
    for (const Point& x : u.removed_points) {
        // Existing vertex: mark removed.
        int hit = -1;
        for (std::size_t v = 0; v < view.verts.size(); ++v)
            if (approx_point(view.verts[v], x, tol)) {
                hit = static_cast<int>(v);
                break;
            }
        if (hit >= 0) {
            view.removed[static_cast<std::size_t>(hit)] = 1;
            continue;
        }
        // Interior of an edge: split it, marking the cut vertex removed.
        for (std::size_t e = 0; e < view.edges.size(); ++e) {
            const auto& ed = view.edges[e];
            const Point& pa = view.verts[static_cast<std::size_t>(ed.a)];
            const Point& pb = view.verts[static_cast<std::size_t>(ed.b)];
            if (point_segment_dist(x, pa, pb) > tol) continue;
            double t = point_segment_param(x, pa, pb);
            if (t * ed.len <= tol || (1 - t) * ed.len <= tol) continue;
            int vnew = static_cast<int>(view.verts.size());
            view.verts.push_back(x);
            view.removed.push_back(1);
            int e1 = static_cast<int>(view.edges.size());
            int e2 = e1 + 1;
            double m = view.mult[static_cast<int>(e)];
            view.edges.push_back({ed.a, vnew, dist(pa, x)});
            view.edges.push_back({vnew, ed.b, dist(x, pb)});
            view.mult[e1] = m;
            view.mult[e2] = m;
            view.mult.erase(static_cast<int>(e));
            // Rewrite atom paths through the split edge.
            for (auto& path : view.paths) {
                std::vector<EdgeStep> np;
                for (const EdgeStep& st : path) {
                    if (st.edge != static_cast<int>(e)) {
                        np.push_back(st);
                    } else if (st.forward) {
                        np.push_back({e1, true});
                        np.push_back({e2, true});
                    } else {
                        np.push_back({e2, false});
                        np.push_back({e1, false});
                    }
                }
                path = std::move(np);
            }
            view.edges[e].len = 0;  // dead marker; mult erased above
            break;
        }
    }
    return view;
}

}  // namespace

ComponentDecomposition connected_components(const TrafficPlan& p, const OpenSetSpec& u) {
    if (!check_simple_path(p))
        throw std::invalid_argument("connected_components: plan is not simple-path");
    SinglePathWitness w = check_single_path(p);
    if (!w.ok)
        throw std::invalid_argument("connected_components: plan is not single-path");
    ComponentDecomposition dec;
    if (p.empty()) return dec;
    dec.net = make_view(p, u);
    const SplitNetworkView& view = dec.net;

    // Union-find over live edges joined at non-removed shared vertices.
    std::size_t ne = view.edges.size();
    std::vector<int> uf(ne);
    for (std::size_t i = 0; i < ne; ++i) uf[i] = static_cast<int>(i);
    auto find = [&](int e) {
        while (uf[static_cast<std::size_t>(e)] != e) {
            uf[static_cast<std::size_t>(e)] = uf[static_cast<std::size_t>(uf[static_cast<std::size_t>(e)])];
            e = uf[static_cast<std::size_t>(e)];
        }
        return e;
    };
    auto unite = [&](int a, int b) { uf[static_cast<std::size_t>(find(a))] = find(b); };
    std::map<int, std::vector<int>> at_vertex;
    for (std::size_t e = 0; e < ne; ++e) {
        if (!view.mult.count(static_cast<int>(e))) continue;  // dead split parent
        at_vertex[view.edges[e].a].push_back(static_cast<int>(e));
        at_vertex[view.edges[e].b].push_back(static_cast<int>(e));
    }
    for (const auto& [v, es] : at_vertex) {
        if (view.removed[static_cast<std::size_t>(v)]) continue;
        for (std::size_t i = 1; i < es.size(); ++i) unite(es[0], es[i]);
    }
    // Components ordered by minimal edge id.
    std::map<int, int> comp_of_root;
    std::vector<std::vector<int>> comp_edges;
    for (std::size_t e = 0; e < ne; ++e) {
        if (!view.mult.count(static_cast<int>(e))) continue;
        int r = find(static_cast<int>(e));
        auto it = comp_of_root.find(r);
        if (it == comp_of_root.end()) {
            it = comp_of_root.emplace(r, static_cast<int>(comp_edges.size())).first;
            comp_edges.emplace_back();
        }
        comp_edges[static_cast<std::size_t>(it->second)].push_back(static_cast<int>(e));
    }

    std::vector<ComponentRecord> comps(comp_edges.size());
    for (std::size_t c = 0; c < comp_edges.size(); ++c) comps[c].edges = comp_edges[c];
    std::map<int, int> comp_of_edge;
    for (std::size_t c = 0; c < comp_edges.size(); ++c)
        for (int e : comp_edges[c]) comp_of_edge[e] = static_cast<int>(c);

    std::vector<std::vector<Atom>> comp_atoms(comp_edges.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& path = view.paths[i];
        if (path.empty()) continue;
        // Runs of consecutive same-component steps; each component may appear
        // in at most one run (the interval structure of the restriction map).
        std::set<int> seen_closed;
        std::size_t k = 0;
        double t = 0;
        while (k < path.size()) {
            int c = comp_of_edge.at(path[k].edge);
            if (seen_closed.count(c)) {
                std::ostringstream os;
                os << "connected_components: atom " << i << " visits component " << c
                   << " in two separated intervals (single-path violation upstream)";
                throw CertificateError(os.str());
            }
            double t0 = t;
            std::vector<Point> vs;
            const auto& first = view.edges[static_cast<std::size_t>(path[k].edge)];
            vs.push_back(view.verts[static_cast<std::size_t>(path[k].forward ? first.a : first.b)]);
            while (k < path.size() && comp_of_edge.at(path[k].edge) == c) {
                const auto& e = view.edges[static_cast<std::size_t>(path[k].edge)];
                vs.push_back(view.verts[static_cast<std::size_t>(path[k].forward ? e.b : e.a)]);
                t += e.len;
                ++k;
            }
            seen_closed.insert(c);
            comp_atoms[static_cast<std::size_t>(c)].push_back(
                {PolyCurve(vs), p.atoms()[i].mass});
            comps[static_cast<std::size_t>(c)].restrictions.push_back(
                {static_cast<int>(i), t0, t});
        }
    }
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (!comp_atoms[c].empty())
            comps[c].plan = TrafficPlan(std::move(comp_atoms[c]), p.snap_tol(),
                                        p.domain_radius());
    }
    // Q_n multiplicity on the split edges, computed from the recorded runs.
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& path = view.paths[i];
        std::set<std::pair<int, int>> seen;  // (comp, edge)
        for (const EdgeStep& st : path) {
            int c = comp_of_edge.at(st.edge);
            if (seen.insert({c, st.edge}).second)
                comps[static_cast<std::size_t>(c)].mult[st.edge] += p.atoms()[i].mass;
        }
    }
    dec.comps = std::move(comps);
    return dec;
}

bool component_multiplicity_check(const TrafficPlan& p, const ComponentDecomposition& dec) {
    (void)p;
    std::set<int> assigned;
    for (const auto& comp : dec.comps) {
        for (int e : comp.edges) {
            if (!assigned.insert(e).second) return false;  // edge in two components
            auto it = comp.mult.find(e);
            auto pm = dec.net.mult.find(e);
            if (it == comp.mult.end() || pm == dec.net.mult.end()) return false;
            if (std::fabs(it->second - pm->second) > 1e-12) return false;
        }
        for (const auto& [e, m] : comp.mult) {
            if (std::find(comp.edges.begin(), comp.edges.end(), e) == comp.edges.end() &&
                m > 1e-12)
                return false;
        }
    }
    // Every positive-multiplicity edge belongs to exactly one component.
    for (const auto& [e, m] : dec.net.mult)
        if (m > 0 && !assigned.count(e)) return false;
    return true;
}

AuditReport component_optimality_audit(const TrafficPlan& p, const ComponentDecomposition& dec,
                                       const GridSpec& oracle_spec, double alpha,
                                       std::uint64_t budget) {
    AuditReport rep;
    std::uint64_t used = 0;
    auto audit = [&](const std::vector<int>& comps, const TrafficPlan& plan) {
        AuditEntry entry;
        entry.comps = comps;
        entry.energy = alpha_energy(plan, alpha);
        Coupling pi = coupling_of(plan);
        if (pi.size() > 5) {
            rep.partial = true;
            return;
        }
        if (used >= budget) {
            rep.partial = true;
            return;
        }
        ++used;
        try {
            CandidateGraph g = CandidateGraph::build(pi, oracle_spec);
            SolveResult oracle = solve_exact(pi, g, alpha, oracle_spec.max_path_len,
                                             oracle_spec.budget);
            entry.oracle_energy = oracle.energy;
            entry.ok = entry.energy <= oracle.energy + 1e-9;
        } catch (const BudgetError&) {
            rep.partial = true;
            return;
        }
        if (!entry.ok) rep.all_ok = false;
        rep.entries.push_back(std::move(entry));
    };
    for (std::size_t n = 0; n < dec.comps.size(); ++n)
        audit({static_cast<int>(n)}, dec.comps[n].plan);
    for (std::size_t n = 0; n < dec.comps.size(); ++n)
        for (std::size_t m = n + 1; m < dec.comps.size(); ++m)
            audit({static_cast<int>(n), static_cast<int>(m)},
                  dec.comps[n].plan + dec.comps[m].plan);
    (void)p;
    return rep;
}

FinitenessResult finiteness_experiment(const TrafficPlan& p, const Point& x, double min_length,
                                       double alpha) {
    for (const Atom& a : p.atoms())
        if (a.curve.stopping_time() < min_length - 1e-12)
            throw std::invalid_argument("finiteness_experiment: atom shorter than min_length");
    auto [mu_minus, mu_plus] = marginals(p);
    if (mu_minus.mass_at(x, p.snap_tol()) > 0 || mu_plus.mass_at(x, p.snap_tol()) > 0)
        throw std::invalid_argument("finiteness_experiment: x lies in a marginal support");

    ComponentDecomposition dec = connected_components(p, {{x}});
    FinitenessResult res;
    res.count = static_cast<int>(dec.comps.size());
    double total_energy = alpha_energy(p, alpha);
    double min_floor = std::numeric_limits<double>::infinity();
    for (const auto& comp : dec.comps) {
        double reach = 0;
        for (int e : comp.edges) {
            const auto& ed = dec.net.edges[static_cast<std::size_t>(e)];
            reach = std::max(reach, dist(x, dec.net.verts[static_cast<std::size_t>(ed.a)]));
            reach = std::max(reach, dist(x, dec.net.verts[static_cast<std::size_t>(ed.b)]));
        }
        double min_mass = std::numeric_limits<double>::infinity();
        for (const Atom& a : comp.plan.atoms()) min_mass = std::min(min_mass, a.mass);
        double floor = std::min(min_length, reach) * std::pow(min_mass, alpha);
        res.floors.push_back(floor);
        res.energies.push_back(alpha_energy(comp.plan, alpha));
        min_floor = std::min(min_floor, floor);
    }
    res.count_bound = min_floor > 0 ? total_energy / min_floor
                                    : std::numeric_limits<double>::infinity();
    return res;
}

}  // namespace bransport
