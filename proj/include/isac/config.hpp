#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "isac/analysis.hpp"
#include "isac/scenario.hpp"

namespace isac {

struct ScenarioSpec {
    std::filesystem::path file; // when set, targets come from this file
    std::size_t n = 64;
    std::size_t l = 4;
    double min_separation = 1.0;
    AmplitudeLaw amplitude = AmplitudeLaw::unit_random_phase;
    std::uint64_t placement_seed = 1;
    double sigma2 = 1.0;
};

/// Flat key/value text with [scenario], [waveforms] and [run] sections.
struct RunConfig {
    ScenarioSpec scenario;
    std::vector<std::string> waveforms;
    std::string constellation = "qam16";
    SelectionKind selection = SelectionKind::delay;
    double snr_start = 0.0;
    double snr_stop = 20.0;
    double snr_step = 5.0;
    std::size_t trials = 20000;
    std::uint64_t seed = 1;
    SkipPolicy skip_policy = SkipPolicy::skip;
    std::size_t threads = 1;
    std::optional<double> bandwidth_hz;
    std::string out;
    // geodesic / scaling experiments
    std::uint64_t direction_seed = 1;
    double step = kDefaultGeodesicStep;
    unsigned moment_k = 2;
    std::vector<std::size_t> n_list{32, 64, 128, 256};
    std::string family = "sc";
};

/// Relative scenario file paths resolve against `base_dir`; the file must exist.
RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Every field in fixed order; parse_config(canonical(c)) reproduces c.
std::string canonical(const RunConfig& c);
/// FNV-1a over the canonical form without the result-neutral keys (threads, out).
std::uint64_t config_hash(const RunConfig& c);

std::vector<double> snr_grid(const RunConfig& c);
Scenario make_scenario(const RunConfig& c);

} // namespace isac
