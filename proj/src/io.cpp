#include "bransport/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bransport/errors.hpp"
#include "bransport/experiment.hpp"

namespace bransport {

json to_json(const PolyCurve& c) {
    json j = json::array();
    for (const Point& v : c.vertices()) j.push_back(v);
    return j;
}

json to_json(const TrafficPlan& p) {
    json atoms = json::array();
    for (const Atom& a : p.atoms()) atoms.push_back({{"curve", to_json(a.curve)}, {"mass", a.mass}});
    return {{"atoms", atoms}};
}

json to_json(const Coupling& pi) {
    json pairs = json::array();
    for (const auto& a : pi.atoms())
        pairs.push_back({{"src", a.src}, {"dst", a.dst}, {"mass", a.mass}});
    return {{"pairs", pairs}};
}

json to_json(const DiscreteMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms()) atoms.push_back({{"x", a.x}, {"mass", a.w}});
    return {{"atoms", atoms}};
}

json network_to_json(const Network& net) {
    json verts = json::array();
    for (int v = 0; v < net.vertex_count(); ++v) verts.push_back(net.vertex(v));
    json edges = json::array();
    for (const auto& e : net.edges())
        if (e.alive) edges.push_back({e.a, e.b});
    return {{"vertices", verts}, {"edges", edges}};
}

json to_json(const ConnectorReport& rep) {
    return {{"energy", rep.energy},
            {"bound", rep.bound},
            {"constant_achieved", rep.constant_achieved},
            {"cube_side", rep.cube_side},
            {"total_mass", rep.total_mass},
            {"root_cost", rep.root_cost},
            {"tree_cost", rep.tree_cost},
            {"level_costs", rep.level_costs},
            {"level_bounds", rep.level_bounds},
            {"plan", to_json(rep.plan)}};
}

json to_json(const BallCover& cover) {
    json balls = json::array();
    for (const auto& b : cover.balls)
        balls.push_back({{"center", b.center}, {"radius", b.radius}, {"mass", b.covered_mass}});
    return {{"balls", balls},
            {"certificate", cover.certificate},
            {"eps", cover.eps},
            {"grid_mode", cover.grid_mode},
            {"r0", cover.r0},
            {"covered_mass", cover.covered_mass},
            {"total_mass", cover.total_mass}};
}

json to_json(const CompetitorBundle& bundle) {
    return {{"P1", to_json(bundle.P1)},
            {"P2", to_json(bundle.P2)},
            {"competitor", to_json(bundle.competitor)},
            {"e_P1", bundle.e_P1},
            {"e_P2", bundle.e_P2},
            {"eps_budget", bundle.eps_budget},
            {"eps_bar", bundle.eps_bar},
            {"energy", bundle.energy},
            {"coupling_ok", bundle.coupling_ok}};
}

json to_json(const SolveResult& res, double alpha) {
    return {{"plan", to_json(res.plan)},
            {"energy", res.energy},
            {"alpha", alpha},
            {"certificate",
             res.certificate == Certificate::exhaustive ? "exhaustive" : "local-optimum"},
            {"explored", res.explored},
            {"single_path_ok", res.single_path_ok},
            {"warnings", res.warnings}};
}

json to_json(const ComponentDecomposition& dec, double alpha) {
    json comps = json::array();
    for (const auto& comp : dec.comps) {
        json restrictions = json::array();
        for (const auto& r : comp.restrictions)
            restrictions.push_back({{"atom", r.atom}, {"phi1", r.phi1}, {"phi2", r.phi2}});
        comps.push_back({{"edges", comp.edges},
                         {"plan", to_json(comp.plan)},
                         {"energy", alpha_energy(comp.plan, alpha)},
                         {"restrictions", restrictions}});
    }
    return {{"components", comps}, {"count", dec.comps.size()}};
}

json to_json(const ExperimentReport& rep) {
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"n", r.n},
                        {"solved", r.solved},
                        {"energy", r.energy},
                        {"bound", r.bound},
                        {"gap", r.gap},
                        {"eps1", r.eps1},
                        {"eps2", r.eps2},
                        {"eps_bar", r.eps_bar},
                        {"bound_type", r.grid_certified ? "grid-certified" : "continuum-bound"},
                        {"support_hash", r.support_hash}});
    return {{"rows", rows},
            {"limit_energy", rep.limit_energy},
            {"limit_support_hash", rep.limit_support_hash},
            {"limit_exhaustive", rep.limit_exhaustive},
            {"verdict", rep.verdict},
            {"verdict_tol", rep.verdict_tol},
            {"runtime_sec", rep.runtime_sec}};
}

PolyCurve curve_from_json(const json& j) {
    std::vector<Point> vs;
    for (const auto& v : j) vs.push_back(v.get<Point>());
    return PolyCurve(std::move(vs));
}

TrafficPlan plan_from_json(const json& j) {
    std::vector<Atom> atoms;
    for (const auto& a : j.at("atoms"))
        atoms.push_back({curve_from_json(a.at("curve")), a.at("mass").get<double>()});
    return atoms.empty() ? TrafficPlan() : TrafficPlan(std::move(atoms));
}

Coupling coupling_from_json(const json& j) {
    std::vector<CouplingAtom> atoms;
    for (const auto& a : j.at("pairs"))
        atoms.push_back({a.at("src").get<Point>(), a.at("dst").get<Point>(),
                         a.at("mass").get<double>()});
    return atoms.empty() ? Coupling() : Coupling(std::move(atoms));
}

DiscreteMeasure measure_from_json(const json& j) {
    std::vector<WeightedPoint> atoms;
    for (const auto& a : j.at("atoms"))
        atoms.push_back({a.at("x").get<Point>(), a.at("mass").get<double>()});
    return atoms.empty() ? DiscreteMeasure() : DiscreteMeasure(std::move(atoms));
}

std::string canonical_dump(const json& j) { return j.dump(2) + "\n"; }

void write_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open for writing: " + path);
    os << content;
    if (!os) throw IoError("write failed: " + path);
}

std::string read_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open for reading: " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

std::string energy_csv(const std::string& instance_id, double alpha, const TrafficPlan& p) {
    std::ostringstream os;
    os << "instance,alpha,energy,mass,simple_path,single_path\n";
    os << instance_id << "," << fmt(alpha) << "," << fmt(alpha_energy(p, alpha)) << ","
       << fmt(alpha_mass(p, alpha)) << "," << (check_simple_path(p) ? 1 : 0) << ","
       << (check_single_path(p).ok ? 1 : 0) << "\n";
    return os.str();
}

std::string stability_csv(const ExperimentReport& rep) {
    std::ostringstream os;
    os << "n,solved,energy,bound,gap,eps1,eps2,eps_bar,bound_type,support_hash\n";
    for (const auto& r : rep.rows)
        os << r.n << "," << (r.solved ? 1 : 0) << "," << fmt(r.energy) << "," << fmt(r.bound)
           << "," << fmt(r.gap) << "," << fmt(r.eps1) << "," << fmt(r.eps2) << ","
           << fmt(r.eps_bar) << "," << (r.grid_certified ? "grid-certified" : "continuum-bound")
           << "," << r.support_hash << "\n";
    return os.str();
}

namespace {

struct SvgFrame {
    double min_x = 0, min_y = 0, w = 1, h = 1;
};

SvgFrame frame_of(const Network& net) {
    SvgFrame f;
    if (net.vertex_count() == 0) return f;
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (int v = 0; v < net.vertex_count(); ++v) {
        const Point& p = net.vertex(v);
        double x = p[0], y = p.size() > 1 ? p[1] : 0;
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
        min_y = std::min(min_y, y);
        max_y = std::max(max_y, y);
    }
    double pad = 0.1 * std::max(max_x - min_x, max_y - min_y) + 0.1;
    f.min_x = min_x - pad;
    f.min_y = min_y - pad;
    f.w = (max_x - min_x) + 2 * pad;
    f.h = (max_y - min_y) + 2 * pad;
    return f;
}

void svg_header(std::ostringstream& os, const SvgFrame& f) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << fmt(f.min_x) << " "
       << fmt(f.min_y) << " " << fmt(f.w) << " " << fmt(f.h) << "\">\n";
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

}  // namespace

std::string render_svg(const TrafficPlan& p, double alpha) {
    std::ostringstream os;
    if (p.empty()) {
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 1 1\"/>\n";
        return os.str();
    }
    const Network& net = p.network();
    SvgFrame f = frame_of(net);
    svg_header(os, f);
    const MultiplicityField& mult = p.multiplicity();
    for (std::size_t e = 0; e < net.edges().size(); ++e) {
        const auto& ed = net.edges()[e];
        if (!ed.alive) continue;
        auto it = mult.find(static_cast<int>(e));
        if (it == mult.end() || it->second <= 0) continue;
        const Point& a = net.vertex(ed.a);
        const Point& b = net.vertex(ed.b);
        double w = std::pow(it->second, alpha);
        os << "  <line x1=\"" << fmt(a[0]) << "\" y1=\"" << fmt(a.size() > 1 ? a[1] : 0)
           << "\" x2=\"" << fmt(b[0]) << "\" y2=\"" << fmt(b.size() > 1 ? b[1] : 0)
           << "\" stroke=\"#1f77b4\" stroke-width=\"" << fmt(0.02 * f.w * w)
           << "\" data-mult-pow=\"" << fmt(w) << "\" stroke-linecap=\"round\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_svg(const ComponentDecomposition& dec, double alpha) {
    std::ostringstream os;
    double min_x = 1e300, min_y = 1e300, max_x = -1e300, max_y = -1e300;
    for (const auto& v : dec.net.verts) {
        min_x = std::min(min_x, v[0]);
        max_x = std::max(max_x, v[0]);
        min_y = std::min(min_y, v.size() > 1 ? v[1] : 0);
        max_y = std::max(max_y, v.size() > 1 ? v[1] : 0);
    }
    SvgFrame f;
    double pad = 0.1 * std::max(max_x - min_x, max_y - min_y) + 0.1;
    f.min_x = min_x - pad;
    f.min_y = min_y - pad;
    f.w = (max_x - min_x) + 2 * pad;
    f.h = (max_y - min_y) + 2 * pad;
    svg_header(os, f);
    for (std::size_t c = 0; c < dec.comps.size(); ++c) {
        const char* color = kPalette[c % (sizeof kPalette / sizeof kPalette[0])];
        for (int e : dec.comps[c].edges) {
            const auto& ed = dec.net.edges[static_cast<std::size_t>(e)];
            const Point& a = dec.net.verts[static_cast<std::size_t>(ed.a)];
            const Point& b = dec.net.verts[static_cast<std::size_t>(ed.b)];
            double w = std::pow(dec.comps[c].mult.at(e), alpha);
            os << "  <line x1=\"" << fmt(a[0]) << "\" y1=\"" << fmt(a.size() > 1 ? a[1] : 0)
               << "\" x2=\"" << fmt(b[0]) << "\" y2=\"" << fmt(b.size() > 1 ? b[1] : 0)
               << "\" stroke=\"" << color << "\" stroke-width=\"" << fmt(0.02 * f.w * w)
               << "\" stroke-linecap=\"round\"/>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::uint64_t fnv1a(std::string_view bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t support_hash(const TrafficPlan& p) {
    json curves = json::array();
    for (const Atom& a : p.atoms()) curves.push_back(to_json(a.curve));
    return fnv1a(curves.dump());
}

}  // namespace bransport
