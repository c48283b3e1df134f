#include "bitree/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "bitree/constants.hpp"
#include "bitree/constructive.hpp"
#include "bitree/experiments.hpp"
#include "bitree/io.hpp"

namespace bitree {

namespace {

namespace fs = std::filesystem;

struct CliState {
    Config cfg;
    std::string out_file;  // per-command override
};

std::string default_out(const CliState& st, const std::string& name) {
    if (!st.out_file.empty()) return st.out_file;
    return (fs::path(st.cfg.out_dir) / name).string();
}

nlohmann::json load_json(const std::string& path) {
    return nlohmann::json::parse(read_file(path));
}

void emit(const CliState& st, const std::string& name, nlohmann::json report) {
    report["config"] = config_to_json(st.cfg);
    atomic_write_file(default_out(st, name), report.dump(2) + "\n");
}

SearchStrategy make_strategy(const CliState& st, bool search) {
    SearchStrategy strat;
    strat.exhaustive = !search;
    strat.restarts = st.cfg.search_restarts;
    strat.seed = st.cfg.seed;
    strat.max_exhaustive_support = st.cfg.max_exhaustive_support;
    return strat;
}

int cmd_check(const CliState& st, const std::string& measure_path, bool search) {
    BoundaryMeasure mu = measure_from_json(load_json(measure_path), st.cfg.limits);
    OrderingReport rep = ordering_report(mu, make_strategy(st, search), st.cfg.spectral_tol);
    nlohmann::json j = ordering_to_json(rep);
    j["measure_file"] = measure_path;
    emit(st, "check_report.json", j);
    std::cout << "box=" << rep.box.value << " carleson=" << rep.carleson.value
              << " rec=" << rep.rec.value << " hereditary=" << rep.hereditary.value
              << " embedding=" << rep.embedding.value << "\n";
    if (!rep.orderings_hold) {
        std::cerr << "ordering violated: " << rep.violation << "\n";
        return 2;
    }
    return 0;
}

int cmd_constants(const CliState& st, const std::string& measure_path, const std::string& kind,
                  bool search) {
    BoundaryMeasure mu = measure_from_json(load_json(measure_path), st.cfg.limits);
    SearchStrategy strat = make_strategy(st, search);
    nlohmann::json j;
    auto one = [&](const std::string& k) -> nlohmann::json {
        if (k == "box") return constant_to_json(box_constant(mu));
        if (k == "carleson") return constant_to_json(carleson_constant(mu, strat));
        if (k == "rec") return constant_to_json(rec_constant(mu, strat));
        if (k == "hereditary") return constant_to_json(hereditary_constant(mu, strat));
        if (k == "embedding") return constant_to_json(embedding_constant(mu, st.cfg.spectral_tol));
        throw CLI::ValidationError("unknown constant kind: " + k);
    };
    if (kind == "all") {
        for (const char* k : {"box", "carleson", "rec", "hereditary", "embedding"})
            j[k] = one(k);
    } else {
        j[kind] = one(kind);
    }
    j["measure_file"] = measure_path;
    emit(st, "constants_report.json", j);
    std::cout << j.dump(2) << "\n";
    return 0;
}

int cmd_majorant(const CliState& st, const std::string& measure_path, double lambda,
                 const std::string& set_path, bool truncated, double delta, bool rescale,
                 bool relax, const std::string& phi_binary) {
    BoundaryMeasure mu = measure_from_json(load_json(measure_path), st.cfg.limits);
    BoundarySet F = set_path.empty() ? BoundarySet(mu.geometry())
                                     : set_from_json(load_json(set_path), st.cfg.limits);
    MajorantOptions opts;
    opts.rescale = rescale;
    opts.relax_preconditions = relax;
    MajorantResult res = truncated ? build_truncated_majorant(mu, F, lambda, delta, opts)
                                   : build_embedding_majorant(mu, F, lambda, opts);

    // Independent re-verification of the certified bounds from the result
    // data alone.
    const Geometry& g = mu.geometry();
    Eigen::VectorXd Iphi = hardy_sum(g, res.phi);
    bool ok = res.phi.squaredNorm() <= res.norm_bound * (1.0 + 1e-9) + 1e-300;
    for (BoundaryId b : res.f_echo)
        ok = ok && Iphi[g.boundary_node(b)] >= res.certified_lower * (1.0 - 1e-9);

    nlohmann::json j = majorant_to_json(res);
    j["measure_file"] = measure_path;
    j["truncated"] = truncated;
    if (truncated) j["delta"] = delta;
    j["reverified"] = ok;
    if (!phi_binary.empty()) {
        write_node_function_binary(phi_binary, res.phi);
        j["phi_binary"] = phi_binary;
        j.erase("phi");
    }
    emit(st, "majorant_report.json", j);
    std::cout << "certified_lower=" << res.certified_lower << " norm_sq=" << res.norm_sq
              << " norm_bound=" << res.norm_bound << "\n";
    return ok ? 0 : 2;
}

int cmd_peel(const CliState& st, const std::string& measure_path, double constant) {
    BoundaryMeasure nu = measure_from_json(load_json(measure_path), st.cfg.limits);
    PeelingResult res = peel_measure(nu, constant);
    nlohmann::json j = peeling_to_json(res);
    j["measure_file"] = measure_path;
    emit(st, "peel_report.json", j);
    std::cout << "layers=" << res.layer_sets.size() << " residual_atoms=" << res.residual_set.size()
              << " energy_kept=" << (res.energy_before > 0 ? res.energy_after / res.energy_before : 0.0)
              << "\n";
    return 0;
}

int cmd_equilibrium(const CliState& st, const std::string& set_path) {
    BoundarySet F = set_from_json(load_json(set_path), st.cfg.limits);
    BoundaryMeasure rho = equilibrium_measure(F.geometry(), F, st.cfg.equilibrium_tol);
    nlohmann::json j = measure_to_json(rho);
    atomic_write_file(default_out(st, "equilibrium_measure.json"), j.dump(2) + "\n");
    std::cout << "total_mass=" << rho.total() << "\n";
    return 0;
}

int cmd_experiment(const CliState& st, const std::string& name, const std::string& spec_path,
                   bool csv) {
    static const std::vector<std::string> names = {"mass_decay",        "mutual_energy_split",
                                                   "truncation_loss",   "level_set_capture",
                                                   "rec_to_embedding",  "box_decay"};
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        std::cerr << "unknown experiment \"" << name << "\"; available:";
        for (const auto& n : names) std::cerr << " " << n;
        std::cerr << "\n";
        return 1;
    }

    nlohmann::json sj = spec_path.empty() ? nlohmann::json::object() : load_json(spec_path);
    GeneratorSpec gen;
    if (sj.contains("generator")) {
        const auto& gj = sj["generator"];
        gen.kind = gj.value("kind", std::string("bitree")) == "tree" ? Kind::tree : Kind::bitree;
        gen.depth_x = gj.value("depth_x", 2);
        gen.depth_y = gj.value("depth_y", 2);
        std::string law = gj.value("law", std::string("exponential"));
        gen.law = law == "uniform" ? MassLaw::uniform
                                   : (law == "sparse" ? MassLaw::sparse : MassLaw::exponential);
        gen.sparse_p = gj.value("p", 0.5);
        gen.pareto_alpha = gj.value("pareto_alpha", 1.5);
        std::string norm = gj.value("normalization", std::string("unit_mass"));
        gen.normalization = norm == "potential_le_one_on_support"
                                ? Normalization::potential_le_one_on_support
                                : (norm == "potential_ge_one_on_support"
                                       ? Normalization::potential_ge_one_on_support
                                       : Normalization::unit_mass);
    }
    gen.seed = st.cfg.seed;
    int trials = sj.value("trials", 32);
    std::vector<double> lambda_grid =
        sj.value("lambda_grid", std::vector<double>{1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0});
    std::vector<double> delta_grid =
        sj.value("delta_grid", std::vector<double>{0.0625, 0.125, 0.25, 0.5, 1.0});
    double c32 = sj.value("c32", 0.0);

    ExperimentReport rep;
    if (name == "mass_decay") rep = run_mass_decay(gen, lambda_grid, trials, st.cfg);
    if (name == "mutual_energy_split") rep = run_mutual_energy_split(gen, trials, st.cfg);
    if (name == "truncation_loss") rep = run_truncation_loss(gen, delta_grid, trials, st.cfg);
    if (name == "level_set_capture") rep = run_level_set_capture(gen, trials, c32, st.cfg);
    if (name == "rec_to_embedding") rep = run_rec_to_embedding(gen, trials, st.cfg);
    if (name == "box_decay") rep = run_box_decay(gen, trials, st.cfg);

    atomic_write_file(default_out(st, name + "_report.json"), rep.data.dump(2) + "\n");
    if (csv) {
        fs::path csv_path = fs::path(default_out(st, name + "_report.json"));
        csv_path.replace_extension(".csv");
        atomic_write_file(csv_path.string(), rep.csv);
    }
    std::cout << name << ": " << (rep.all_assertions_hold ? "all assertions hold" : "ASSERTION FAILED")
              << "\n";
    return rep.all_assertions_hold ? 0 : 2;
}

int cmd_gen(const CliState& st, const std::string& spec_path) {
    nlohmann::json sj = load_json(spec_path);
    GeneratorSpec gen;
    gen.kind = sj.value("kind", std::string("bitree")) == "tree" ? Kind::tree : Kind::bitree;
    gen.depth_x = sj.value("depth_x", 2);
    gen.depth_y = sj.value("depth_y", 2);
    std::string law = sj.value("law", std::string("exponential"));
    gen.law = law == "uniform" ? MassLaw::uniform
                               : (law == "sparse" ? MassLaw::sparse : MassLaw::exponential);
    gen.sparse_p = sj.value("p", 0.5);
    gen.pareto_alpha = sj.value("pareto_alpha", 1.5);
    std::string norm = sj.value("normalization", std::string("unit_mass"));
    gen.normalization = norm == "potential_le_one_on_support"
                            ? Normalization::potential_le_one_on_support
                            : (norm == "potential_ge_one_on_support"
                                   ? Normalization::potential_ge_one_on_support
                                   : Normalization::unit_mass);
    gen.seed = sj.contains("seed") ? sj["seed"].get<std::uint64_t>() : st.cfg.seed;

    BoundaryMeasure mu = gen_random_measure(gen, st.cfg.limits);
    atomic_write_file(default_out(st, "measure.json"), measure_to_json(mu).dump(2) + "\n");
    std::cout << "atoms=" << mu.support().size() << " total=" << mu.total() << "\n";
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"discrete potential theory on dyadic trees and bi-trees"};
    app.require_subcommand(1);
    app.fallthrough();

    CliState st;
    app.add_option("--seed", st.cfg.seed, "master seed for all randomness");
    app.add_option("--out-dir", st.cfg.out_dir, "directory for report files");
    app.add_option("--max-exhaustive", st.cfg.max_exhaustive_support,
                   "largest support size for exhaustive subset scans");
    app.add_option("--tolerance", st.cfg.spectral_tol, "spectral tolerance");
    app.add_option("--out", st.out_file, "explicit output file for the report");

    std::string measure_path, set_path, spec_path, kind = "all", exp_name, phi_binary;
    bool search = false, truncated = false, rescale = false, relax = false, csv = false;
    double lambda = 9.0, delta = 1.0, peel_c = 3.0;

    auto* check = app.add_subcommand("check", "compute all constants and verify the orderings");
    check->add_option("measure", measure_path)->required();
    check->add_flag("--search", search, "local search instead of exhaustive scan");
    check->add_flag("--exhaustive", [](std::int64_t) {}, "exhaustive scan (default)");

    auto* constants = app.add_subcommand("constants", "compute testing constants");
    constants->add_option("measure", measure_path)->required();
    constants->add_option("--kind", kind, "box|carleson|rec|hereditary|embedding|all");
    constants->add_flag("--search", search);

    auto* majorant = app.add_subcommand("majorant", "build a certified bi-tree majorant");
    majorant->add_option("measure", measure_path)->required();
    majorant->add_option("--lambda", lambda)->required();
    majorant->add_option("--set", set_path, "target set F (JSON)");
    majorant->add_flag("--truncated", truncated);
    majorant->add_option("--delta", delta);
    majorant->add_flag("--rescale", rescale);
    majorant->add_flag("--relax-preconditions", relax);
    majorant->add_option("--phi-binary", phi_binary, "write phi as a binary node function");

    auto* peel = app.add_subcommand("peel", "peel low-potential layers off a measure");
    peel->add_option("measure", measure_path)->required();
    peel->add_option("--constant", peel_c)->required();

    auto* equilibrium = app.add_subcommand("equilibrium", "equilibrium measure of a tree boundary set");
    equilibrium->add_option("--set", set_path)->required();

    auto* experiment = app.add_subcommand("experiment", "run a named experiment");
    experiment->add_option("name", exp_name)->required();
    experiment->add_option("--spec", spec_path);
    experiment->add_flag("--csv", csv);

    auto* gen = app.add_subcommand("gen", "generate a random measure");
    gen->add_option("--spec", spec_path)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*check) return cmd_check(st, measure_path, search);
        if (*constants) return cmd_constants(st, measure_path, kind, search);
        if (*majorant)
            return cmd_majorant(st, measure_path, lambda, set_path, truncated, delta, rescale, relax,
                                phi_binary);
        if (*peel) return cmd_peel(st, measure_path, peel_c);
        if (*equilibrium) return cmd_equilibrium(st, set_path);
        if (*experiment) return cmd_experiment(st, exp_name, spec_path, csv);
        if (*gen) return cmd_gen(st, spec_path);
    } catch (const nlohmann::json::parse_error& e) {
        std::cerr << "JSON parse error: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "JSON error: " << e.what() << "\n";
        return 1;
    } catch (const SizeLimitError& e) {
        std::cerr << "size limit: " << e.what() << "\n";
        return 1;
    } catch (const GeometryMismatchError& e) {
        std::cerr << "geometry mismatch: " << e.what() << "\n";
        return 1;
    } catch (const PreconditionError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const CertificateError& e) {
        std::cerr << "certificate failed: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "no convergence: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace bitree
