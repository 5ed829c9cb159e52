#include "bransport/traffic_plan.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace bransport {

void InstanceConfig::validate() const {
    if (d < 1) throw std::invalid_argument("InstanceConfig: d >= 1 required");
    if (!(R > 0)) throw std::invalid_argument("InstanceConfig: R > 0 required");
    if (!(alpha > 0) || alpha > 1)
        throw std::invalid_argument("InstanceConfig: alpha in (0,1] required");
    if (!(C_stop > 0)) throw std::invalid_argument("InstanceConfig: C_stop > 0 required");
}

TrafficPlan::TrafficPlan(std::vector<Atom> atoms, double snap_tol, double domain_radius)
    : snap_tol_(snap_tol), domain_radius_(domain_radius) {
    for (auto& a : atoms) {
        if (!(a.mass > 0)) throw std::invalid_argument("TrafficPlan: nonpositive atom mass");
        if (!a.curve.valid()) throw std::invalid_argument("TrafficPlan: invalid curve");
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) {
        if (a.curve == b.curve) return a.mass < b.mass;
        return a.curve.lex_before(b.curve);
    });
    for (auto& a : atoms) {
        if (!atoms_.empty() && atoms_.back().curve == a.curve)
            atoms_.back().mass += a.mass;
        else
            atoms_.push_back(std::move(a));
    }
    build();
}

void TrafficPlan::build() {
    auto reg = std::make_shared<Registration>();
    reg->net = Network(snap_tol_, domain_radius_);
    for (const Atom& a : atoms_) reg->net.add_curve(a.curve);
    reg->paths.reserve(atoms_.size());
    for (const Atom& a : atoms_) reg->paths.push_back(reg->net.path_of(a.curve));
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        std::set<int> seen;
        for (const EdgeStep& s : reg->paths[i])
            if (seen.insert(s.edge).second) reg->mult[s.edge] += atoms_[i].mass;
    }
    reg_ = std::move(reg);
}

double TrafficPlan::total_mass() const {
    double s = 0;
    for (const Atom& a : atoms_) s += a.mass;
    return s;
}

const Network& TrafficPlan::network() const {
    if (!reg_) throw std::logic_error("TrafficPlan: empty plan has no network");
    return reg_->net;
}

const std::vector<EdgeStep>& TrafficPlan::path(std::size_t atom) const {
    return reg_->paths[atom];
}

const MultiplicityField& TrafficPlan::multiplicity() const {
    static const MultiplicityField kEmpty;
    return reg_ ? reg_->mult : kEmpty;
}

double TrafficPlan::multiplicity_at(const Point& p) const {
    if (!reg_) return 0;
    Network::Location loc = reg_->net.locate(p);
    if (loc.kind == Network::Location::Kind::none) return 0;
    double s = 0;
    if (loc.kind == Network::Location::Kind::edge_interior) {
        for (std::size_t i = 0; i < atoms_.size(); ++i) {
            for (const EdgeStep& st : reg_->paths[i])
                if (st.edge == loc.index) {
                    s += atoms_[i].mass;
                    break;
                }
        }
        return s;
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        bool through = false;
        if (reg_->paths[i].empty()) {
            through = approx_point(atoms_[i].curve.start(), p, snap_tol_);
        } else {
            for (const EdgeStep& st : reg_->paths[i]) {
                const auto& e = reg_->net.edges()[static_cast<std::size_t>(st.edge)];
                if (e.a == loc.index || e.b == loc.index) {
                    through = true;
                    break;
                }
            }
        }
        if (through) s += atoms_[i].mass;
    }
    return s;
}

TrafficPlan TrafficPlan::scaled(double s) const {
    if (s == 0) return {};
    if (!(s > 0)) throw std::invalid_argument("TrafficPlan::scaled: negative factor");
    std::vector<Atom> atoms = atoms_;
    for (auto& a : atoms) a.mass *= s;
    return TrafficPlan(std::move(atoms), snap_tol_, domain_radius_);
}

TrafficPlan TrafficPlan::reversed() const {
    std::vector<Atom> atoms;
    atoms.reserve(atoms_.size());
    for (const Atom& a : atoms_) atoms.push_back({a.curve.reversed(), a.mass});
    return TrafficPlan(std::move(atoms), snap_tol_, domain_radius_);
}

TrafficPlan operator+(const TrafficPlan& a, const TrafficPlan& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    std::vector<Atom> atoms = a.atoms_;
    atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
    return TrafficPlan(std::move(atoms), std::min(a.snap_tol_, b.snap_tol_),
                       std::max(a.domain_radius_, b.domain_radius_));
}

bool TrafficPlan::approx_equal(const TrafficPlan& other, double pos_tol,
                               double mass_tol) const {
    if (atoms_.size() != other.atoms_.size()) return false;
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (!atoms_[i].curve.approx_equal(other.atoms_[i].curve, pos_tol)) return false;
        if (std::fabs(atoms_[i].mass - other.atoms_[i].mass) > mass_tol) return false;
    }
    return true;
}

TrafficPlan TrafficPlan::constant(const DiscreteMeasure& mu, double snap_tol) {
    std::vector<Atom> atoms;
    atoms.reserve(mu.size());
    for (const auto& a : mu.atoms()) atoms.push_back({PolyCurve::constant(a.x), a.w});
    return atoms.empty() ? TrafficPlan() : TrafficPlan(std::move(atoms), snap_tol);
}

Coupling coupling_of(const TrafficPlan& p) {
    std::vector<CouplingAtom> atoms;
    atoms.reserve(p.size());
    for (const Atom& a : p.atoms()) atoms.push_back({a.curve.start(), a.curve.end(), a.mass});
    return atoms.empty() ? Coupling() : Coupling(std::move(atoms), p.snap_tol());
}

std::pair<DiscreteMeasure, DiscreteMeasure> marginals(const TrafficPlan& p) {
    return {irrigating_measure(p), irrigated_measure(p)};
}

DiscreteMeasure irrigating_measure(const TrafficPlan& p) {
    std::vector<WeightedPoint> pts;
    pts.reserve(p.size());
    for (const Atom& a : p.atoms()) pts.push_back({a.curve.start(), a.mass});
    return pts.empty() ? DiscreteMeasure() : DiscreteMeasure(std::move(pts), p.snap_tol());
}

DiscreteMeasure irrigated_measure(const TrafficPlan& p) {
    std::vector<WeightedPoint> pts;
    pts.reserve(p.size());
    for (const Atom& a : p.atoms()) pts.push_back({a.curve.end(), a.mass});
    return pts.empty() ? DiscreteMeasure() : DiscreteMeasure(std::move(pts), p.snap_tol());
}

double alpha_energy(const TrafficPlan& p, double alpha) {
    if (!(alpha > 0) || alpha > 1) throw std::invalid_argument("alpha in (0,1] required");
    if (p.empty()) return 0;
    const Network& net = p.network();
    const MultiplicityField& mult = p.multiplicity();
    double total = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double atom_sum = 0;
        for (const EdgeStep& st : p.path(i)) {
            auto it = mult.find(st.edge);
            assert(it != mult.end() && it->second > 0);
            atom_sum += net.edges()[static_cast<std::size_t>(st.edge)].len *
                        std::pow(it->second, alpha - 1.0);
        }
        total += p.atoms()[i].mass * atom_sum;
    }
    return total;
}

double alpha_mass(const TrafficPlan& p, double alpha) {
    if (!(alpha > 0) || alpha > 1) throw std::invalid_argument("alpha in (0,1] required");
    if (p.empty()) return 0;
    const Network& net = p.network();
    const MultiplicityField& mult = p.multiplicity();
    double total = 0;
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        if (!net.edges()[e].alive) continue;
        auto it = mult.find(static_cast<int>(e));
        if (it == mult.end() || it->second <= 0) continue;
        total += net.edges()[e].len * std::pow(it->second, alpha);
    }
    return total;
}

bool check_tpc(const TrafficPlan& p, double C) {
    double s = 0;
    for (const Atom& a : p.atoms()) s += a.mass * a.curve.stopping_time();
    return s <= C;
}

bool check_simple_path(const TrafficPlan& p) {
    for (const Atom& a : p.atoms()) {
        DoublePointSet d = a.curve.double_points(p.snap_tol());
        if (d.length > p.snap_tol()) return false;
    }
    return true;
}

SinglePathWitness check_single_path(const TrafficPlan& p) {
    SinglePathWitness w;
    if (p.size() < 2) return w;
    const Network& net = p.network();
    // Vertex chains per atom (first-visit indices).
    std::vector<std::vector<int>> chains(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& path = p.path(i);
        if (path.empty()) continue;
        std::vector<int>& ch = chains[i];
        const auto& e0 = net.edges()[static_cast<std::size_t>(path[0].edge)];
        ch.push_back(path[0].forward ? e0.a : e0.b);
        for (const EdgeStep& st : path) {
            const auto& e = net.edges()[static_cast<std::size_t>(st.edge)];
            ch.push_back(st.forward ? e.b : e.a);
        }
    }
    auto first_index = [](const std::vector<int>& ch, int v) -> int {
        for (std::size_t k = 0; k < ch.size(); ++k)
            if (ch[k] == v) return static_cast<int>(k);
        return -1;
    };
    for (std::size_t a = 0; a < p.size(); ++a) {
        for (std::size_t b = a + 1; b < p.size(); ++b) {
            if (chains[a].empty() || chains[b].empty()) continue;
            std::vector<int> common;
            std::set<int> in_b(chains[b].begin(), chains[b].end());
            std::set<int> added;
            for (int v : chains[a])
                if (in_b.count(v) && added.insert(v).second) common.push_back(v);
            for (std::size_t i = 0; i < common.size(); ++i) {
                for (std::size_t j = i + 1; j < common.size(); ++j) {
                    int x = common[i], y = common[j];
                    auto span_edges = [&](std::size_t atom, int u, int v) {
                        int iu = first_index(chains[atom], u);
                        int iv = first_index(chains[atom], v);
                        if (iu > iv) std::swap(iu, iv);
                        std::set<int> es;
                        for (int k = iu; k < iv; ++k)
                            es.insert(p.path(atom)[static_cast<std::size_t>(k)].edge);
                        return es;
                    };
                    if (span_edges(a, x, y) != span_edges(b, x, y)) {
                        w.ok = false;
                        w.x = net.vertex(x);
                        w.y = net.vertex(y);
                        w.atom_a = static_cast<int>(a);
                        w.atom_b = static_cast<int>(b);
                        return w;
                    }
                }
            }
        }
    }
    return w;
}

std::vector<TrafficPlan> decompose_by_couplings(const TrafficPlan& p,
                                                const std::vector<Coupling>& parts) {
    Coupling pi = coupling_of(p);
    Coupling sum;
    for (const Coupling& part : parts) sum = sum + part;
    std::string diff = pi.first_difference(sum, p.snap_tol(), 1e-12);
    if (!diff.empty())
        throw std::invalid_argument("decompose: coupling mismatch (" + diff + ")");
    std::vector<std::vector<Atom>> out(parts.size());
    for (const Atom& a : p.atoms()) {
        const Point& x = a.curve.start();
        const Point& y = a.curve.end();
        double c = 0;
        std::vector<double> q(parts.size());
        for (std::size_t i = 0; i < parts.size(); ++i) {
            q[i] = parts[i].mass_at(x, y, p.snap_tol());
            c += q[i];
        }
        if (c <= 0) continue;
        for (std::size_t i = 0; i < parts.size(); ++i)
            if (q[i] > 0) out[i].push_back({a.curve, a.mass * q[i] / c});
    }
    std::vector<TrafficPlan> plans;
    plans.reserve(parts.size());
    for (auto& atoms : out)
        plans.push_back(atoms.empty() ? TrafficPlan()
                                      : TrafficPlan(std::move(atoms), p.snap_tol(),
                                                    p.domain_radius()));
    return plans;
}

std::vector<TrafficPlan> decompose_by_products(
    const TrafficPlan& p,
    const std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>>& parts) {
    std::vector<Coupling> couplings;
    couplings.reserve(parts.size());
    for (const auto& [mu, nu] : parts) couplings.push_back(product_coupling(mu, nu));
    return decompose_by_couplings(p, couplings);
}

}  // namespace bransport
