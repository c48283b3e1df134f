#include "bitree/io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace bitree {

namespace {

constexpr char kMagic[8] = {'B', 'T', 'N', 'O', 'D', 'E', 'F', 'N'};
constexpr std::uint32_t kVersion = 1;

Geometry geometry_from_json(const nlohmann::json& j, const GeometryLimits& limits) {
    std::string kind = j.at("kind").get<std::string>();
    int dx = j.at("depth_x").get<int>();
    if (kind == "tree") return make_tree(dx, limits);
    if (kind == "bitree") return make_bitree(dx, j.at("depth_y").get<int>(), limits);
    throw PreconditionError("kind must be \"tree\" or \"bitree\", got \"" + kind + "\"");
}

void geometry_to_json(const Geometry& g, nlohmann::json& j) {
    j["kind"] = g.kind() == Kind::tree ? "tree" : "bitree";
    j["depth_x"] = g.x().depth;
    if (g.kind() == Kind::bitree) j["depth_y"] = g.y().depth;
}

}  // namespace

nlohmann::json measure_to_json(const BoundaryMeasure& mu) {
    nlohmann::json j;
    geometry_to_json(mu.geometry(), j);
    j["masses"] = std::vector<double>(mu.masses().data(), mu.masses().data() + mu.masses().size());
    return j;
}

BoundaryMeasure measure_from_json(const nlohmann::json& j, const GeometryLimits& limits) {
    Geometry g = geometry_from_json(j, limits);
    auto masses = j.at("masses").get<std::vector<double>>();
    if (static_cast<std::int64_t>(masses.size()) != g.boundary_count())
        throw PreconditionError("masses array has " + std::to_string(masses.size()) +
                                " entries but the boundary has " + std::to_string(g.boundary_count()));
    return BoundaryMeasure(g, Eigen::Map<Eigen::VectorXd>(masses.data(), masses.size()));
}

nlohmann::json set_to_json(const BoundarySet& s) {
    nlohmann::json j;
    geometry_to_json(s.geometry(), j);
    j["indices"] = s.indices();
    return j;
}

BoundarySet set_from_json(const nlohmann::json& j, const GeometryLimits& limits) {
    Geometry g = geometry_from_json(j, limits);
    return BoundarySet(g, j.at("indices").get<std::vector<BoundaryId>>());
}

nlohmann::json energy_to_json(const EnergyReport& rep) {
    nlohmann::json j;
    j["total"] = rep.total;
    if (rep.local) j["local"] = *rep.local;
    if (rep.restricted) j["restricted"] = *rep.restricted;
    if (rep.truncated) j["truncated"] = *rep.truncated;
    return j;
}

nlohmann::json constant_to_json(const ConstantReport& rep) {
    nlohmann::json meta;
    meta["iterations"] = rep.iterations;
    meta["restarts"] = rep.restarts;
    meta["lower_bound_only"] = rep.lower_bound_only;
    if (!rep.witness_f.empty()) meta["witness_f"] = rep.witness_f;
    if (rep.witness_psi.size() > 0)
        meta["witness_psi"] = std::vector<double>(rep.witness_psi.data(),
                                                  rep.witness_psi.data() + rep.witness_psi.size());
    return {{"kind", to_string(rep.kind)},
            {"value", rep.value},
            {"method", to_string(rep.method)},
            {"witness", rep.witness_e},
            {"meta", meta}};
}

nlohmann::json ordering_to_json(const OrderingReport& rep) {
    nlohmann::json j;
    j["box"] = constant_to_json(rep.box);
    j["carleson"] = constant_to_json(rep.carleson);
    j["rec"] = constant_to_json(rep.rec);
    j["hereditary"] = constant_to_json(rep.hereditary);
    j["embedding"] = constant_to_json(rep.embedding);
    j["all_exhaustive"] = rep.all_exhaustive;
    j["orderings_hold"] = rep.orderings_hold;
    if (!rep.violation.empty()) j["violation"] = rep.violation;
    auto ratio = [](double a, double b) { return b > 0.0 ? a / b : 0.0; };
    j["ratios"] = {{"carleson_over_box", ratio(rep.carleson.value, rep.box.value)},
                   {"rec_over_carleson", ratio(rep.rec.value, rep.carleson.value)},
                   {"hereditary_over_rec", ratio(rep.hereditary.value, rep.rec.value)},
                   {"embedding_over_rec", ratio(rep.embedding.value, rep.rec.value)}};
    if (rep.tree_generation_statistic)
        j["tree_generation_statistic"] = *rep.tree_generation_statistic;
    return j;
}

nlohmann::json majorant_to_json(const MajorantResult& rep) {
    nlohmann::json j;
    j["lambda"] = rep.lambda;
    j["certified_lower"] = rep.certified_lower;
    j["norm_sq"] = rep.norm_sq;
    j["norm_bound"] = rep.norm_bound;
    j["rescaled"] = rep.rescaled;
    j["f"] = rep.f_echo;
    j["phi"] = std::vector<double>(rep.phi.data(), rep.phi.data() + rep.phi.size());
    nlohmann::json slices = nlohmann::json::array();
    for (const auto& s : rep.slices)
        slices.push_back({{"alpha_y", s.alpha_y},
                          {"stopping_members", s.stopping_members},
                          {"f_slice", s.f_slice}});
    j["slices"] = slices;
    nlohmann::json cuts = nlohmann::json::object();
    for (const auto& [omega, alpha] : rep.cut_levels) cuts[std::to_string(omega)] = alpha;
    j["cut_levels"] = cuts;
    return j;
}

nlohmann::json peeling_to_json(const PeelingResult& rep) {
    nlohmann::json layers = nlohmann::json::array();
    for (std::size_t i = 0; i < rep.layer_sets.size(); ++i)
        layers.push_back({{"set", rep.layer_sets[i].indices()},
                          {"measure", measure_to_json(rep.layer_measures[i])}});
    return {{"constant", rep.constant},
            {"layers", layers},
            {"residual_set", rep.residual_set.indices()},
            {"residual_measure", measure_to_json(rep.residual)},
            {"energy_before", rep.energy_before},
            {"energy_after", rep.energy_after}};
}

nlohmann::json config_to_json(const Config& cfg) {
    return {{"max_exhaustive_support", cfg.max_exhaustive_support},
            {"spectral_tol", cfg.spectral_tol},
            {"equilibrium_tol", cfg.equilibrium_tol},
            {"identity_tol", cfg.identity_tol},
            {"search_restarts", cfg.search_restarts},
            {"seed", cfg.seed},
            {"out_dir", cfg.out_dir},
            {"max_axis_depth", cfg.limits.max_axis_depth},
            {"max_nodes", cfg.limits.max_nodes}};
}

void write_node_function_binary(const std::string& path, const Eigen::VectorXd& values) {
    std::string content;
    content.resize(16 + sizeof(double) * static_cast<std::size_t>(values.size()));
    std::memcpy(content.data(), kMagic, 8);
    std::uint32_t version = kVersion;
    std::uint32_t count = static_cast<std::uint32_t>(values.size());
    std::memcpy(content.data() + 8, &version, 4);
    std::memcpy(content.data() + 12, &count, 4);
    std::memcpy(content.data() + 16, values.data(), sizeof(double) * count);
    atomic_write_file(path, content);
}

Eigen::VectorXd read_node_function_binary(const std::string& path) {
    std::string content = read_file(path);
    if (content.size() < 16 || std::memcmp(content.data(), kMagic, 8) != 0)
        throw PreconditionError("not a node-function binary: " + path);
    std::uint32_t version = 0, count = 0;
    std::memcpy(&version, content.data() + 8, 4);
    std::memcpy(&count, content.data() + 12, 4);
    if (version != kVersion)
        throw PreconditionError("unsupported node-function binary version " + std::to_string(version));
    if (content.size() != 16 + sizeof(double) * count)
        throw PreconditionError("truncated node-function binary: " + path);
    Eigen::VectorXd v(count);
    std::memcpy(v.data(), content.data() + 16, sizeof(double) * count);
    return v;
}

void atomic_write_file(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace bitree
