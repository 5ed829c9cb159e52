// Command-line driver for the branched-transport engine: solving mailing
// instances, covering constructions, competitor bundles, component reports
// and the stability experiment.

#include <cstdio>
#include <exception>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bransport/errors.hpp"
#include "bransport/experiment.hpp"
#include "bransport/io.hpp"

using namespace bransport;

namespace {

Point parse_point(const std::string& s) {
    Point p;
    std::string token;
    std::istringstream is(s);
    while (std::getline(is, token, ',')) p.push_back(std::stod(token));
    return p;
}

struct SharedOpts {
    std::uint64_t seed = 1;
    double alpha = 0.9;
    int dim = 2;
    double radius = 1.5;
    double eps = 0.01;
};

void add_shared(CLI::App* cmd, SharedOpts& o) {
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_option("--alpha", o.alpha, "cost exponent in (0,1]");
    cmd->add_option("--dim", o.dim, "ambient dimension");
    cmd->add_option("--radius", o.radius, "domain ball radius");
    cmd->add_option("--eps", o.eps, "covering budget");
}

Coupling load_or_generate(const std::string& coupling_file, const SharedOpts& o, int pairs,
                          double min_sep) {
    if (!coupling_file.empty())
        return coupling_from_json(json::parse(read_file(coupling_file)));
    InstanceConfig cfg{o.dim, o.radius, o.alpha, 10.0};
    return generate_instance(o.seed, pairs, cfg, min_sep);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"discrete branched-transport engine for the mailing problem"};
    app.require_subcommand(1);

    // solve
    auto* solve = app.add_subcommand("solve", "exhaustive/local alpha-mass minimization");
    SharedOpts so;
    std::string so_coupling, so_out = "solve";
    int so_pairs = 2, so_maxlen = 2, so_knn = 8;
    double so_pitch = 0.25, so_minsep = 0;
    bool so_local = false, so_knn_mode = false, so_refine = false;
    std::uint64_t so_budget = 10'000'000;
    add_shared(solve, so);
    solve->add_option("--coupling", so_coupling, "coupling JSON file");
    solve->add_option("--pairs", so_pairs, "generated instance size");
    solve->add_option("--min-separation", so_minsep, "source/sink separation");
    solve->add_option("--pitch", so_pitch, "Steiner grid pitch");
    solve->add_option("--max-path-len", so_maxlen, "max edges per path");
    solve->add_option("--budget", so_budget, "assignment budget");
    solve->add_flag("--local", so_local, "local search instead of exhaustive");
    solve->add_flag("--knn", so_knn_mode, "k-nearest edges instead of complete graph");
    solve->add_option("--knn-k", so_knn, "neighbors per vertex in knn mode");
    solve->add_flag("--refine", so_refine, "geometric branch-point refinement");
    solve->add_option("--out", so_out, "output prefix");
    solve->callback([&]() {
        Coupling pi = load_or_generate(so_coupling, so, so_pairs, so_minsep);
        GridSpec gs{so_pitch, so.radius, !so_knn_mode, so_knn, so_maxlen, so_budget};
        CandidateGraph g = CandidateGraph::build(pi, gs);
        SolveResult res = so_local ? solve_local(pi, g, so.alpha, so.seed)
                                   : solve_exact(pi, g, so.alpha, so_maxlen, so_budget);
        if (so_refine) {
            RefineResult rr = refine_topology(res.plan, so.alpha);
            res.plan = rr.plan;
            res.energy = rr.energy;
        }
        write_file(so_out + ".json", canonical_dump(to_json(res, so.alpha)));
        write_file(so_out + "_plan.json", canonical_dump(to_json(res.plan)));
        write_file(so_out + ".svg", render_svg(res.plan, so.alpha));
        std::cout << "energy " << res.energy << " explored " << res.explored << "\n";
    });

    // energy
    auto* energy = app.add_subcommand("energy", "alpha-energy/mass CSV for a plan");
    SharedOpts eo;
    std::string eo_plan, eo_out, eo_id = "plan";
    add_shared(energy, eo);
    energy->add_option("--plan", eo_plan, "plan JSON file")->required();
    energy->add_option("--id", eo_id, "instance id for the CSV row");
    energy->add_option("--out", eo_out, "output CSV (stdout when empty)");
    energy->callback([&]() {
        TrafficPlan p = plan_from_json(json::parse(read_file(eo_plan)));
        std::string csv = energy_csv(eo_id, eo.alpha, p);
        if (eo_out.empty())
            std::cout << csv;
        else
            write_file(eo_out, csv);
    });

    // cover
    auto* cover = app.add_subcommand("cover", "ball covering with certificate");
    SharedOpts co;
    std::string co_measure, co_box, co_out = "cover.json";
    double co_density = 1.0;
    add_shared(cover, co);
    cover->add_option("--measure", co_measure, "atomic measure JSON file");
    cover->add_option("--uniform-box", co_box, "lo1,lo2,..;hi1,hi2,.. uniform density box");
    cover->add_option("--density", co_density, "uniform density value");
    cover->add_option("--out", co_out, "output JSON");
    cover->callback([&]() {
        BallCover bc;
        if (!co_box.empty()) {
            auto semi = co_box.find(';');
            if (semi == std::string::npos)
                throw std::invalid_argument("cover: --uniform-box wants lo;hi");
            GridDensity gd{parse_point(co_box.substr(0, semi)),
                           parse_point(co_box.substr(semi + 1)), co_density};
            bc = ball_cover(gd, co.alpha, co.eps);
        } else if (!co_measure.empty()) {
            bc = ball_cover(measure_from_json(json::parse(read_file(co_measure))), co.alpha,
                            co.eps);
        } else {
            throw std::invalid_argument("cover: need --measure or --uniform-box");
        }
        write_file(co_out, canonical_dump(to_json(bc)));
        std::cout << "balls " << bc.balls.size() << " certificate " << bc.certificate << "\n";
    });

    // components
    auto* comps = app.add_subcommand("components", "connected components of a plan");
    SharedOpts po;
    std::string po_plan, po_remove, po_out = "components";
    add_shared(comps, po);
    comps->add_option("--plan", po_plan, "plan JSON file")->required();
    comps->add_option("--remove", po_remove, "removed points x1,y1;x2,y2;...");
    comps->add_option("--out", po_out, "output prefix");
    comps->callback([&]() {
        TrafficPlan p = plan_from_json(json::parse(read_file(po_plan)));
        OpenSetSpec u;
        std::string token;
        std::istringstream is(po_remove);
        while (std::getline(is, token, ';'))
            if (!token.empty()) u.removed_points.push_back(parse_point(token));
        ComponentDecomposition dec = connected_components(p, u);
        write_file(po_out + ".json", canonical_dump(to_json(dec, po.alpha)));
        write_file(po_out + ".svg", render_svg(dec, po.alpha));
        std::cout << "components " << dec.comps.size() << "\n";
    });

    // competitor
    auto* comp = app.add_subcommand("competitor", "stability competitor bundle");
    SharedOpts ko;
    std::string ko_pin, ko_pim, ko_out = "competitor.json";
    int ko_pairs = 2;
    double ko_perturb = 0.2, ko_pitch = 0.3;
    add_shared(comp, ko);
    comp->add_option("--coupling-n", ko_pin, "target coupling JSON");
    comp->add_option("--coupling-m", ko_pim, "source coupling JSON");
    comp->add_option("--pairs", ko_pairs, "generated instance size");
    comp->add_option("--perturb", ko_perturb, "generated perturbation magnitude");
    comp->add_option("--pitch", ko_pitch, "solver pitch for the m-side plan");
    comp->add_option("--out", ko_out, "output JSON");
    comp->callback([&]() {
        InstanceConfig cfg{ko.dim, ko.radius, ko.alpha, 10.0};
        Coupling pi_m = load_or_generate(ko_pim, ko, ko_pairs, 0.2);
        Coupling pi_n;
        if (!ko_pin.empty()) {
            pi_n = coupling_from_json(json::parse(read_file(ko_pin)));
        } else {
            PerturbationSpec pert{ko_perturb, 0.5, ko.seed + 1};
            pi_n = perturb_coupling(pi_m, 1, pert, cfg);
        }
        GridSpec gs{ko_pitch, ko.radius, true, 8, 2, 10'000'000};
        CandidateGraph g = CandidateGraph::build(pi_m, gs);
        SolveResult pm = solve_exact(pi_m, g, ko.alpha, gs.max_path_len, gs.budget);
        double eps_bar = 0;
        CompetitorBundle bundle =
            build_competitor_auto(pi_n, pi_m, pm.plan, pi_m, ko.alpha, 2 * ko.radius, &eps_bar);
        write_file(ko_out, canonical_dump(to_json(bundle)));
        std::cout << "eps_bar " << eps_bar << " e_P1 " << bundle.e_P1 << " e_P2 " << bundle.e_P2
                  << "\n";
    });

    // stability
    auto* stab = app.add_subcommand("stability", "Theorem-style stability experiment");
    SharedOpts to;
    std::string to_coupling, to_out = "stability";
    int to_pairs = 2, to_nmax = 8, to_maxlen = 2;
    double to_pitch = 0.3, to_disp = 0.5, to_jitter = 0.2;
    add_shared(stab, to);
    stab->add_option("--coupling", to_coupling, "base coupling JSON");
    stab->add_option("--pairs", to_pairs, "generated instance size");
    stab->add_option("--n-max", to_nmax, "number of perturbation steps");
    stab->add_option("--pitch", to_pitch, "Steiner grid pitch");
    stab->add_option("--max-path-len", to_maxlen, "max edges per path");
    stab->add_option("--displacement", to_disp, "perturbation displacement");
    stab->add_option("--jitter", to_jitter, "perturbation mass jitter");
    stab->add_option("--out", to_out, "output prefix");
    stab->callback([&]() {
        StabilityExperiment exp;
        exp.config = InstanceConfig{to.dim, to.radius, to.alpha, 10.0};
        exp.base = load_or_generate(to_coupling, to, to_pairs, 0.3);
        exp.pert = PerturbationSpec{to_disp, to_jitter, to.seed + 7};
        exp.grid = GridSpec{to_pitch, to.radius, true, 8, to_maxlen, 10'000'000};
        exp.n_max = to_nmax;
        ExperimentReport rep = run_stability(exp);
        write_file(to_out + ".json", canonical_dump(to_json(rep)));
        write_file(to_out + ".csv", stability_csv(rep));
        std::cout << "limit " << rep.limit_energy << " verdict " << (rep.verdict ? "ok" : "open")
                  << "\n";
    });

    // Exit codes: 0 success, 2 budget refusal, 3 invariant violation, 4 I/O.
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const BudgetError& e) {
        std::cerr << "budget: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "invariant: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
