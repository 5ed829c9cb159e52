#include "bransport/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include "bransport/errors.hpp"

namespace bransport {

namespace {

struct PathEdge {
    int u, v;  // u < v
    double len;
};

std::vector<PathEdge> path_edges(const std::vector<int>& path, const std::vector<Point>& verts) {
    std::vector<PathEdge> es;
    es.reserve(path.size());
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        int a = path[i], b = path[i + 1];
        if (a > b) std::swap(a, b);
        es.push_back({a, b,
                      dist(verts[static_cast<std::size_t>(a)],
                           verts[static_cast<std::size_t>(b)])});
    }
    return es;
}

}  // namespace

int CandidateGraph::find_vertex(const Point& p, double tol) const {
    for (std::size_t i = 0; i < verts.size(); ++i)
        if (approx_point(verts[i], p, tol)) return static_cast<int>(i);
    return -1;
}

std::vector<int> CandidateGraph::neighbors(int v) const {
    std::vector<int> out;
    if (complete) {
        out.reserve(verts.size() - 1);
        for (int u = 0; u < static_cast<int>(verts.size()); ++u)
            if (u != v) out.push_back(u);
        return out;
    }
    for (int e : adj[static_cast<std::size_t>(v)]) {
        const auto& ed = edges[static_cast<std::size_t>(e)];
        out.push_back(ed[0] == v ? ed[1] : ed[0]);
    }
    std::sort(out.begin(), out.end());
    return out;
}

CandidateGraph CandidateGraph::build(const Coupling& pi, const GridSpec& spec) {
    CandidateGraph g;
    g.complete = spec.complete;
    if (pi.empty()) return g;
    int d = static_cast<int>(pi.atoms().front().src.size());
    for (const auto& a : pi.atoms()) {
        if (g.find_vertex(a.src) < 0) g.verts.push_back(a.src);
        if (g.find_vertex(a.dst) < 0) g.verts.push_back(a.dst);
    }
    g.n_terminals = static_cast<int>(g.verts.size());
    if (spec.pitch > 0) {
        int span = static_cast<int>(std::floor(spec.radius / spec.pitch));
        std::vector<int> idx(static_cast<std::size_t>(d), -span);
        while (true) {
            Point p(static_cast<std::size_t>(d));
            for (std::size_t i = 0; i < p.size(); ++i) p[i] = idx[i] * spec.pitch;
            if (norm(p) <= spec.radius + 1e-12 && g.find_vertex(p) < 0) g.verts.push_back(p);
            std::size_t k = 0;
            while (k < idx.size() && ++idx[k] > span) idx[k++] = -span;
            if (k == idx.size()) break;
        }
    }
    if (!spec.complete) {
        g.adj.resize(g.verts.size());
        std::set<std::pair<int, int>> seen;
        for (int v = 0; v < static_cast<int>(g.verts.size()); ++v) {
            std::vector<std::pair<double, int>> near;
            for (int u = 0; u < static_cast<int>(g.verts.size()); ++u)
                if (u != v)
                    near.emplace_back(dist(g.verts[static_cast<std::size_t>(v)],
                                           g.verts[static_cast<std::size_t>(u)]),
                                      u);
            std::sort(near.begin(), near.end());
            int k = std::min<int>(spec.knn, static_cast<int>(near.size()));
            for (int i = 0; i < k; ++i) {
                auto key = std::minmax(v, near[static_cast<std::size_t>(i)].second);
                if (!seen.insert(key).second) continue;
                g.edges.push_back({key.first, key.second});
                int id = static_cast<int>(g.edges.size()) - 1;
                g.adj[static_cast<std::size_t>(key.first)].push_back(id);
                g.adj[static_cast<std::size_t>(key.second)].push_back(id);
            }
        }
    }
    return g;
}

namespace {

// Enumerate simple paths s -> t with at most max_len edges, in lexicographic
// visiting order; aborts via BudgetError when the count exceeds the cap.
void enumerate_paths(const CandidateGraph& g, int s, int t, int max_len, std::uint64_t cap,
                     std::vector<std::vector<int>>& out) {
    std::vector<int> cur{s};
    std::vector<char> used(g.verts.size(), 0);
    used[static_cast<std::size_t>(s)] = 1;
    auto dfs = [&](auto&& self) -> void {
        int v = cur.back();
        if (v == t) {
            out.push_back(cur);
            if (out.size() > cap)
                throw BudgetError("solve_exact: per-atom path enumeration exceeded budget");
            return;
        }
        if (static_cast<int>(cur.size()) - 1 >= max_len) return;
        for (int u : g.neighbors(v)) {
            if (used[static_cast<std::size_t>(u)]) continue;
            used[static_cast<std::size_t>(u)] = 1;
            cur.push_back(u);
            self(self);
            cur.pop_back();
            used[static_cast<std::size_t>(u)] = 0;
        }
    };
    dfs(dfs);
}

TrafficPlan assignment_plan(const Coupling& pi, const CandidateGraph& g,
                            const std::vector<std::vector<int>>& paths) {
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        std::vector<Point> vs;
        for (int v : paths[i]) vs.push_back(g.verts[static_cast<std::size_t>(v)]);
        atoms.push_back({PolyCurve(std::move(vs)), pi.atoms()[i].mass});
    }
    return TrafficPlan(std::move(atoms));
}

}  // namespace

SolveResult solve_exact(const Coupling& pi, const CandidateGraph& g, double alpha,
                        int max_path_len, std::uint64_t budget) {
    if (pi.empty()) return {};
    if (pi.size() > 5)
        throw std::invalid_argument("solve_exact: at most 5 coupling atoms supported");
    std::size_t k = pi.size();

    // Per-atom path lists (vertex sequences) and their edge lists.
    std::vector<std::vector<std::vector<int>>> paths(k);
    std::vector<std::vector<std::vector<PathEdge>>> pedges(k);
    std::uint64_t total = 1;
    for (std::size_t i = 0; i < k; ++i) {
        int s = g.find_vertex(pi.atoms()[i].src);
        int t = g.find_vertex(pi.atoms()[i].dst);
        if (s < 0 || t < 0) throw std::invalid_argument("solve_exact: terminal not in graph");
        enumerate_paths(g, s, t, max_path_len, budget, paths[i]);
        if (paths[i].empty())
            throw std::invalid_argument("solve_exact: no admissible path for an atom");
        if (total > budget / paths[i].size() + 1)
            throw BudgetError("solve_exact: assignment space exceeds budget");
        total *= paths[i].size();
        pedges[i].reserve(paths[i].size());
        for (const auto& p : paths[i]) pedges[i].push_back(path_edges(p, g.verts));
    }
    if (total > budget) throw BudgetError("solve_exact: assignment space exceeds budget");

    // Cost of a multiplicity pattern = pow of the subset mass sum.
    std::vector<double> pow_table(std::size_t(1) << k, 0.0);
    for (std::size_t mask = 1; mask < pow_table.size(); ++mask) {
        double m = 0;
        for (std::size_t i = 0; i < k; ++i)
            if (mask & (std::size_t(1) << i)) m += pi.atoms()[i].mass;
        pow_table[mask] = std::pow(m, alpha);
    }

    std::vector<std::size_t> choice(k, 0), best(k, 0);
    double best_cost = std::numeric_limits<double>::infinity();
    std::uint64_t explored = 0;
    // Small flat map (u,v) -> (len, atom mask); assignments touch few edges.
    struct Slot {
        int u, v;
        double len;
        std::size_t mask;
    };
    std::vector<Slot> slots;
    slots.reserve(16);
    while (true) {
        slots.clear();
        for (std::size_t i = 0; i < k; ++i) {
            for (const PathEdge& e : pedges[i][choice[i]]) {
                bool found = false;
                for (auto& s : slots)
                    if (s.u == e.u && s.v == e.v) {
                        s.mask |= std::size_t(1) << i;
                        found = true;
                        break;
                    }
                if (!found) slots.push_back({e.u, e.v, e.len, std::size_t(1) << i});
            }
        }
        double cost = 0;
        for (const auto& s : slots) cost += s.len * pow_table[s.mask];
        if (cost < best_cost) {
            best_cost = cost;
            best = choice;
        }
        ++explored;
        std::size_t i = k;
        while (i > 0) {
            --i;
            if (++choice[i] < paths[i].size()) break;
            choice[i] = 0;
            if (i == 0) i = k + 1;
        }
        if (i == k + 1) break;
    }

    SolveResult res;
    std::vector<std::vector<int>> chosen(k);
    for (std::size_t i = 0; i < k; ++i) chosen[i] = paths[i][best[i]];
    res.plan = assignment_plan(pi, g, chosen);
    res.energy = best_cost;
    res.certificate = Certificate::exhaustive;
    res.explored = explored;
    SinglePathWitness w = check_single_path(res.plan);
    if (!w.ok) {
        res.single_path_ok = false;
        std::ostringstream os;
        os << "single-path violation between atoms " << w.atom_a << " and " << w.atom_b
           << " (candidate counterexample; review required)";
        res.warnings.push_back(os.str());
    }
    return res;
}

namespace {

// Dijkstra with nonnegative per-edge weights given by the marginal cost of
// adding `mass` on top of `load`.
std::vector<int> best_response(const CandidateGraph& g, int s, int t, double mass, double alpha,
                               const std::map<std::pair<int, int>, double>& load) {
    std::size_t n = g.verts.size();
    std::vector<double> dist_v(n, std::numeric_limits<double>::infinity());
    std::vector<int> prev(n, -1);
    using QE = std::pair<double, int>;
    std::priority_queue<QE, std::vector<QE>, std::greater<>> q;
    dist_v[static_cast<std::size_t>(s)] = 0;
    q.push({0, s});
    while (!q.empty()) {
        auto [dv, v] = q.top();
        q.pop();
        if (dv > dist_v[static_cast<std::size_t>(v)]) continue;
        if (v == t) break;
        for (int u : g.neighbors(v)) {
            auto key = std::minmax(v, u);
            double len = dist(g.verts[static_cast<std::size_t>(v)],
                              g.verts[static_cast<std::size_t>(u)]);
            auto it = load.find(key);
            double base = it == load.end() ? 0.0 : it->second;
            double w = len * (std::pow(base + mass, alpha) - std::pow(base, alpha));
            double nd = dv + w;
            if (nd < dist_v[static_cast<std::size_t>(u)] - 1e-15) {
                dist_v[static_cast<std::size_t>(u)] = nd;
                prev[static_cast<std::size_t>(u)] = v;
                q.push({nd, u});
            }
        }
    }
    std::vector<int> path;
    for (int v = t; v != -1; v = prev[static_cast<std::size_t>(v)]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    if (path.front() != s) throw std::invalid_argument("solve_local: graph is disconnected");
    return path;
}

}  // namespace

SolveResult solve_local(const Coupling& pi, const CandidateGraph& g, double alpha,
                        std::uint64_t seed) {
    if (pi.empty()) return {};
    std::size_t k = pi.size();
    std::vector<std::vector<int>> paths(k);
    std::map<std::pair<int, int>, double> load;
    auto apply = [&](const std::vector<int>& path, double mass) {
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
            load[std::minmax(path[i], path[i + 1])] += mass;
    };
    auto remove = [&](const std::vector<int>& path, double mass) {
        for (std::size_t i = 0; i + 1 < path.size(); ++i)
            load[std::minmax(path[i], path[i + 1])] -= mass;
    };
    auto marginal_cost = [&](const std::vector<int>& path, double mass) {
        double c = 0;
        for (std::size_t i = 0; i + 1 < path.size(); ++i) {
            auto key = std::minmax(path[i], path[i + 1]);
            double len = dist(g.verts[static_cast<std::size_t>(key.first)],
                              g.verts[static_cast<std::size_t>(key.second)]);
            auto it = load.find(key);
            double base = it == load.end() ? 0.0 : it->second;
            c += len * (std::pow(base + mass, alpha) - std::pow(base, alpha));
        }
        return c;
    };
    for (std::size_t i = 0; i < k; ++i) {
        int s = g.find_vertex(pi.atoms()[i].src);
        int t = g.find_vertex(pi.atoms()[i].dst);
        if (s < 0 || t < 0) throw std::invalid_argument("solve_local: terminal not in graph");
        paths[i] = best_response(g, s, t, pi.atoms()[i].mass, 1.0, {});  // plain shortest
        apply(paths[i], pi.atoms()[i].mass);
    }
    // Seeded processing order.
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::mt19937_64 rng(seed);
    for (std::size_t i = k; i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(rng() % i)]);

    std::uint64_t rounds = 0;
    for (int round = 0; round < 100; ++round) {
        bool improved = false;
        for (std::size_t oi : order) {
            double m = pi.atoms()[oi].mass;
            remove(paths[oi], m);
            double current = marginal_cost(paths[oi], m);
            int s = paths[oi].front(), t = paths[oi].back();
            std::vector<int> cand = best_response(g, s, t, m, alpha, load);
            double cand_cost = marginal_cost(cand, m);
            if (cand_cost < current - 1e-12) {
                paths[oi] = cand;
                improved = true;
            }
            apply(paths[oi], m);
        }
        ++rounds;
        if (!improved) break;
    }
    SolveResult res;
    res.plan = assignment_plan(pi, g, paths);
    res.energy = alpha_mass(res.plan, alpha);
    res.certificate = Certificate::local_optimum;
    res.explored = rounds * k;
    res.single_path_ok = check_single_path(res.plan).ok;
    return res;
}

RefineResult refine_topology(const TrafficPlan& plan, double alpha) {
    RefineResult out;
    out.plan = plan;
    out.energy = alpha_mass(plan, alpha);
    if (plan.empty()) return out;
    const Network& net = plan.network();

    // Tree check on the positive-multiplicity edge graph.
    std::vector<int> uf(static_cast<std::size_t>(net.vertex_count()));
    for (std::size_t i = 0; i < uf.size(); ++i) uf[i] = static_cast<int>(i);
    auto find = [&](int v) {
        while (uf[static_cast<std::size_t>(v)] != v) v = uf[static_cast<std::size_t>(v)];
        return v;
    };
    for (const auto& e : net.edges()) {
        if (!e.alive) continue;
        int ra = find(e.a), rb = find(e.b);
        if (ra == rb) return out;  // cycle: returned unchanged, refined=false
        uf[static_cast<std::size_t>(ra)] = rb;
    }

    // Vertex chains of each atom and the terminal set.
    std::vector<std::vector<int>> chains(plan.size());
    std::set<int> terminals;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        const auto& path = plan.path(i);
        auto& ch = chains[i];
        if (path.empty()) {
            int v = net.find_point(plan.atoms()[i].curve.start());
            ch.push_back(v);
            terminals.insert(v);
            continue;
        }
        const auto& e0 = net.edges()[static_cast<std::size_t>(path[0].edge)];
        ch.push_back(path[0].forward ? e0.a : e0.b);
        for (const EdgeStep& st : path) {
            const auto& e = net.edges()[static_cast<std::size_t>(st.edge)];
            ch.push_back(st.forward ? e.b : e.a);
        }
        terminals.insert(ch.front());
        terminals.insert(ch.back());
    }

    std::vector<Point> pos(static_cast<std::size_t>(net.vertex_count()));
    for (int v = 0; v < net.vertex_count(); ++v) pos[static_cast<std::size_t>(v)] = net.vertex(v);
    std::vector<int> degree(pos.size(), 0);
    for (const auto& e : net.edges())
        if (e.alive) {
            ++degree[static_cast<std::size_t>(e.a)];
            ++degree[static_cast<std::size_t>(e.b)];
        }

    // Splice collinear non-terminal degree-2 vertices out of the chains.
    std::set<int> spliced;
    for (int v = 0; v < net.vertex_count(); ++v) {
        if (degree[static_cast<std::size_t>(v)] != 2 || terminals.count(v)) continue;
        std::vector<int> nbr;
        for (int e : net.edges_at(v)) {
            if (!net.edges()[static_cast<std::size_t>(e)].alive) continue;
            nbr.push_back(net.opposite(e, v));
        }
        if (nbr.size() != 2) continue;
        Point u = sub(pos[static_cast<std::size_t>(nbr[0])], pos[static_cast<std::size_t>(v)]);
        Point w = sub(pos[static_cast<std::size_t>(nbr[1])], pos[static_cast<std::size_t>(v)]);
        double cosang = dot(u, w) / (norm(u) * norm(w));
        if (cosang < -1 + 1e-9) spliced.insert(v);
    }

    // Movable vertices: non-terminal, degree >= 3.
    std::vector<int> movable;
    for (int v = 0; v < net.vertex_count(); ++v)
        if (degree[static_cast<std::size_t>(v)] >= 3 && !terminals.count(v)) movable.push_back(v);

    const MultiplicityField& mult = plan.multiplicity();
    auto star_cost = [&](int v, const Point& z) {
        double c = 0;
        for (int e : net.edges_at(v)) {
            const auto& ed = net.edges()[static_cast<std::size_t>(e)];
            if (!ed.alive) continue;
            int o = net.opposite(e, v);
            c += std::pow(mult.at(e), alpha) * dist(z, pos[static_cast<std::size_t>(o)]);
        }
        return c;
    };
    const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int sweep = 0; sweep < 200; ++sweep) {
        double improvement = 0;
        for (int v : movable) {
            double span = 0;
            for (int e : net.edges_at(v))
                if (net.edges()[static_cast<std::size_t>(e)].alive)
                    span = std::max(span, net.edges()[static_cast<std::size_t>(e)].len);
            Point& z = pos[static_cast<std::size_t>(v)];
            for (std::size_t c = 0; c < z.size(); ++c) {
                double a = z[c] - span, b = z[c] + span;
                auto f = [&](double x) {
                    Point trial = z;
                    trial[c] = x;
                    return star_cost(v, trial);
                };
                double x1 = b - golden * (b - a), x2 = a + golden * (b - a);
                double f1 = f(x1), f2 = f(x2);
                for (int it = 0; it < 80; ++it) {
                    if (f1 < f2) {
                        b = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = b - golden * (b - a);
                        f1 = f(x1);
                    } else {
                        a = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = a + golden * (b - a);
                        f2 = f(x2);
                    }
                }
                double xbest = f1 < f2 ? x1 : x2;
                double before = star_cost(v, z);
                Point trial = z;
                trial[c] = xbest;
                double after = star_cost(v, trial);
                if (after < before - 1e-14) {
                    improvement += before - after;
                    z = trial;
                }
            }
        }
        if (improvement < 1e-12) break;
    }

    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < plan.size(); ++i) {
        std::vector<Point> vs;
        for (int v : chains[i])
            if (!spliced.count(v)) vs.push_back(pos[static_cast<std::size_t>(v)]);
        atoms.push_back({PolyCurve(std::move(vs)), plan.atoms()[i].mass});
    }
    TrafficPlan refined(std::move(atoms), plan.snap_tol(), plan.domain_radius());
    double new_energy = alpha_mass(refined, alpha);
    if (new_energy <= out.energy + 1e-12) {
        out.plan = std::move(refined);
        out.energy = std::min(new_energy, out.energy);
        out.refined = true;
    }
    return out;
}

}  // namespace bransport
