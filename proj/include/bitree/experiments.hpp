#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "bitree/config.hpp"
#include "bitree/types.hpp"

namespace bitree {

enum class MassLaw { uniform, exponential, sparse };

enum class Normalization { unit_mass, potential_le_one_on_support, potential_ge_one_on_support };

std::string to_string(MassLaw law);
std::string to_string(Normalization n);

struct GeneratorSpec {
    Kind kind = Kind::bitree;
    int depth_x = 2;
    int depth_y = 2;
    MassLaw law = MassLaw::exponential;
    double sparse_p = 0.5;
    double pareto_alpha = 1.5;
    Normalization normalization = Normalization::unit_mass;
    std::uint64_t seed = 0;
};

// Deterministic in the seed; the declared normalization holds exactly after
// scaling by the computed extreme of the potential (or the total mass).
BoundaryMeasure gen_random_measure(const GeneratorSpec& spec, const GeometryLimits& limits = {});

struct ExperimentReport {
    std::string id;
    nlohmann::json data;        // full report payload, reproducible bytes
    bool all_assertions_hold = true;
    std::string csv;            // per-instance observables, optional hand-off
};

// Decay of mu{V >= lambda} across a lambda grid, with the Chebyshev bound
// asserted and the empirical exponent fitted on log-log observables.
ExperimentReport run_mass_decay(const GeneratorSpec& spec, const std::vector<double>& lambda_grid,
                                int trials, const Config& cfg);

// Mutual energy of nested random pieces against the Cauchy-Schwarz bound
// (asserted) and the 3/7-4/7 profile (recorded).
ExperimentReport run_mutual_energy_split(const GeneratorSpec& spec, int trials, const Config& cfg);

// E_delta[mu] against delta^(1/2) E[mu] across a delta grid; the running max
// is the empirical constant, and the level-set complement bound is asserted.
ExperimentReport run_truncation_loss(const GeneratorSpec& spec, const std::vector<double>& delta_grid,
                                     int trials, const Config& cfg);

// Feeds peeled measures into the level-set capture bound E_E[nu] >= E[nu]/2.
// c32 <= 0 calibrates it from a truncation pre-pass plus ten percent.
ExperimentReport run_level_set_capture(const GeneratorSpec& spec, int trials, double c32,
                                       const Config& cfg);

// Exhaustive REC constant against the spectral embedding constant, plus the
// level-set decomposition of the extremal witness.
ExperimentReport run_rec_to_embedding(const GeneratorSpec& spec, int trials, const Config& cfg);

// Box-normalized generation statistic, measurement only.
ExperimentReport run_box_decay(const GeneratorSpec& spec, int trials, const Config& cfg);

}  // namespace bitree
