#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include "oracles.hpp"

#include "bitree/cli.hpp"
#include "bitree/experiments.hpp"
#include "bitree/io.hpp"

using namespace bitree;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("bitree_test_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("measure JSON round trip") {
    Rng rng(97);
    BoundaryMeasure mu = oracles::random_measure(make_bitree(2, 1), rng);
    nlohmann::json j = measure_to_json(mu);
    BoundaryMeasure back = measure_from_json(j);
    CHECK(back.geometry() == mu.geometry());
    CHECK(back.masses() == mu.masses());
    CHECK(measure_to_json(back).dump() == j.dump());

    BoundaryMeasure t = oracles::random_measure(make_tree(3), rng);
    nlohmann::json jt = measure_to_json(t);
    CHECK_FALSE(jt.contains("depth_y"));
    CHECK(measure_from_json(jt).masses() == t.masses());
}

TEST_CASE("measure JSON validation") {
    nlohmann::json j = {{"kind", "tree"}, {"depth_x", 2}, {"masses", {1.0, 2.0}}};
    CHECK_THROWS_AS(measure_from_json(j), PreconditionError);  // wrong length
    j["kind"] = "forest";
    CHECK_THROWS_AS(measure_from_json(j), PreconditionError);
}

TEST_CASE("set JSON round trip keeps sorted indices") {
    Geometry g = make_bitree(1, 2);
    BoundarySet s(g, {5, 1, 3});
    nlohmann::json j = set_to_json(s);
    CHECK(j["indices"] == nlohmann::json({1, 3, 5}));
    CHECK(set_from_json(j).indices() == s.indices());
}

TEST_CASE("binary node function round trip") {
    TempDir tmp;
    Rng rng(101);
    Geometry g = make_bitree(2, 2);
    Eigen::VectorXd v(g.node_count());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.uniform(-5, 5);
    std::string path = tmp.file("phi.bin");
    write_node_function_binary(path, v);
    CHECK(read_node_function_binary(path) == v);
    CHECK(fs::file_size(path) == 16 + 8 * static_cast<std::size_t>(v.size()));
}

TEST_CASE("cli gen then check") {
    TempDir tmp;
    std::string spec = tmp.file("gen.json");
    atomic_write_file(spec, nlohmann::json{{"kind", "bitree"},
                                           {"depth_x", 1},
                                           {"depth_y", 1},
                                           {"law", "uniform"},
                                           {"normalization", "unit_mass"},
                                           {"seed", 3}}
                                .dump());
    std::string measure = tmp.file("measure.json");
    CHECK(run_cli({"gen", "--spec", spec, "--out", measure}) == 0);

    // Round trip: the written measure re-serializes byte-identically.
    std::string bytes = read_file(measure);
    BoundaryMeasure mu = measure_from_json(nlohmann::json::parse(bytes));
    CHECK(measure_to_json(mu).dump(2) + "\n" == bytes);
    for (BoundaryId b = 0; b < 4; ++b) CHECK(mu.mass(b) == doctest::Approx(0.25));

    std::string report = tmp.file("check.json");
    CHECK(run_cli({"check", measure, "--out", report}) == 0);
    nlohmann::json rep = nlohmann::json::parse(read_file(report));
    CHECK(rep["carleson"]["value"].get<double>() == doctest::Approx(2.25));
    CHECK(rep["rec"]["value"].get<double>() == doctest::Approx(2.25));
    CHECK(rep["box"]["value"].get<double>() == doctest::Approx(2.25));
    CHECK(rep["embedding"]["value"].get<double>() >= 2.25 * (1 - 1e-9));
    CHECK(rep["orderings_hold"].get<bool>());
}

TEST_CASE("cli error paths") {
    TempDir tmp;
    SUBCASE("malformed JSON exits 1 with position info") {
        std::string bad = tmp.file("bad.json");
        atomic_write_file(bad, "{ \"kind\": \"tree\", ");
        CHECK(run_cli({"check", bad}) == 1);
    }
    SUBCASE("unknown experiment exits 1") {
        CHECK(run_cli({"experiment", "does_not_exist", "--out-dir", tmp.path.string()}) == 1);
    }
    SUBCASE("usage error exits 1") {
        CHECK(run_cli({"majorant"}) == 1);
        CHECK(run_cli({}) == 1);
    }
    SUBCASE("lambda gate on the bi-tree majorant exits 2") {
        std::string measure = tmp.file("m.json");
        Geometry g = make_bitree(1, 1);
        atomic_write_file(measure,
                          measure_to_json(BoundaryMeasure::zero(g)).dump());
        CHECK(run_cli({"majorant", measure, "--lambda", "5"}) == 2);
    }
    SUBCASE("zero measure peel precondition") {
        std::string measure = tmp.file("m.json");
        Geometry g = make_bitree(1, 1);
        atomic_write_file(measure, measure_to_json(BoundaryMeasure(g, Eigen::VectorXd::Constant(4, 0.25))).dump());
        CHECK(run_cli({"peel", measure, "--constant", "3.0", "--out-dir", tmp.path.string()}) == 2);
    }
}

TEST_CASE("cli equilibrium command") {
    TempDir tmp;
    std::string set = tmp.file("set.json");
    Geometry g = make_tree(1);
    atomic_write_file(set, set_to_json(BoundarySet::full(g)).dump());
    std::string out = tmp.file("rho.json");
    CHECK(run_cli({"equilibrium", "--set", set, "--out", out}) == 0);
    BoundaryMeasure rho = measure_from_json(nlohmann::json::parse(read_file(out)));
    CHECK(rho.mass(0) == doctest::Approx(1.0 / 3));
    CHECK(rho.mass(1) == doctest::Approx(1.0 / 3));
}

TEST_CASE("cli majorant runs on an admissible instance") {
    TempDir tmp;
    GeneratorSpec spec;
    spec.depth_x = spec.depth_y = 2;
    spec.normalization = Normalization::potential_le_one_on_support;
    spec.seed = 21;
    BoundaryMeasure mu = gen_random_measure(spec);
    std::string measure = tmp.file("m.json");
    atomic_write_file(measure, measure_to_json(mu).dump());
    std::string report = tmp.file("maj.json");
    CHECK(run_cli({"majorant", measure, "--lambda", "9", "--out", report}) == 0);
    nlohmann::json rep = nlohmann::json::parse(read_file(report));
    CHECK(rep["reverified"].get<bool>());
    CHECK(rep["norm_sq"].get<double>() <= rep["norm_bound"].get<double>() + 1e-12);
}

TEST_CASE("cli reports are byte-identical across reruns") {
    TempDir tmp;
    std::string spec = tmp.file("exp.json");
    atomic_write_file(spec, nlohmann::json{{"generator",
                                            {{"kind", "bitree"},
                                             {"depth_x", 2},
                                             {"depth_y", 2},
                                             {"law", "sparse"},
                                             {"normalization", "unit_mass"}}},
                                           {"trials", 6}}
                                .dump());
    std::string out = tmp.file("rep.json");
    CHECK(run_cli({"--seed", "99", "experiment", "mass_decay", "--spec", spec, "--out", out,
                   "--csv"}) == 0);
    std::string first = read_file(out);
    std::string first_csv = read_file(tmp.file("rep.csv"));
    CHECK(run_cli({"--seed", "99", "experiment", "mass_decay", "--spec", spec, "--out", out,
                   "--csv"}) == 0);
    CHECK(read_file(out) == first);
    CHECK(read_file(tmp.file("rep.csv")) == first_csv);

    // Gen twice with the same seed: identical bytes.
    std::string gspec = tmp.file("gen.json");
    atomic_write_file(gspec, nlohmann::json{{"kind", "tree"}, {"depth_x", 3}, {"seed", 5}}.dump());
    std::string m1 = tmp.file("m1.json"), m2 = tmp.file("m2.json");
    CHECK(run_cli({"gen", "--spec", gspec, "--out", m1}) == 0);
    CHECK(run_cli({"gen", "--spec", gspec, "--out", m2}) == 0);
    CHECK(read_file(m1) == read_file(m2));
}
