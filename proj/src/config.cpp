#include "isac/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace isac {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

struct LineError {
    int line;
    [[noreturn]] void fail(const std::string& why) const {
        throw Error(ErrorKind::config, "config line " + std::to_string(line) + ": " + why);
    }
};

double to_double(const std::string& v, const LineError& at) {
    std::size_t used = 0;
    double out = 0.0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        at.fail("expected a number, got '" + v + "'");
    }
    if (used != v.size() || !std::isfinite(out)) at.fail("expected a finite number, got '" + v + "'");
    return out;
}

std::uint64_t to_uint(const std::string& v, const LineError& at) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [ptr, ec] = std::from_chars(v.data(), end, out);
    if (v.empty() || ec != std::errc() || ptr != end) at.fail("expected a nonnegative integer, got '" + v + "'");
    return out;
}

std::string fmt(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

std::string_view to_string(AmplitudeLaw law) {
    return law == AmplitudeLaw::unit_real ? "unit_real" : "unit_random_phase";
}

std::string canonical_impl(const RunConfig& c, bool for_hash) {
    std::ostringstream o;
    o << "[scenario]\n";
    if (!c.scenario.file.empty()) {
        o << "file = " << c.scenario.file.string() << "\n";
    } else {
        o << "n = " << c.scenario.n << "\n";
        o << "l = " << c.scenario.l << "\n";
        o << "min_separation = " << fmt(c.scenario.min_separation) << "\n";
        o << "amplitude = " << to_string(c.scenario.amplitude) << "\n";
        o << "placement_seed = " << c.scenario.placement_seed << "\n";
        o << "sigma2 = " << fmt(c.scenario.sigma2) << "\n";
    }
    o << "\n[waveforms]\n";
    for (const auto& w : c.waveforms) o << w << "\n";
    o << "\n[run]\n";
    o << "constellation = " << c.constellation << "\n";
    o << "selection = " << to_string(c.selection) << "\n";
    o << "snr_start = " << fmt(c.snr_start) << "\n";
    o << "snr_stop = " << fmt(c.snr_stop) << "\n";
    o << "snr_step = " << fmt(c.snr_step) << "\n";
    o << "trials = " << c.trials << "\n";
    o << "seed = " << c.seed << "\n";
    o << "skip_policy = " << to_string(c.skip_policy) << "\n";
    if (c.bandwidth_hz) o << "bandwidth_hz = " << fmt(*c.bandwidth_hz) << "\n";
    o << "direction_seed = " << c.direction_seed << "\n";
    o << "step = " << fmt(c.step) << "\n";
    o << "moment_k = " << c.moment_k << "\n";
    o << "n_list = ";
    for (std::size_t i = 0; i < c.n_list.size(); ++i) o << (i ? "," : "") << c.n_list[i];
    o << "\n";
    o << "family = " << c.family << "\n";
    if (!for_hash) {
        o << "threads = " << c.threads << "\n";
        if (!c.out.empty()) o << "out = " << c.out << "\n";
    }
    return o.str();
}

} // namespace

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig c;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const LineError at{lineno};
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        const std::string line = trim(raw);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') at.fail("unterminated section header");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (section != "scenario" && section != "waveforms" && section != "run") {
                at.fail("unknown section [" + section + "]");
            }
            continue;
        }
        if (section.empty()) at.fail("entry outside of any section");
        if (section == "waveforms") {
            if (line.find('=') != std::string::npos) at.fail("waveform entries are bare selectors");
            c.waveforms.push_back(line);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) at.fail("expected 'key = value'");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        const std::string val = trim(std::string_view(line).substr(eq + 1));
        if (val.empty()) at.fail("empty value for '" + key + "'");
        try {
            if (section == "scenario") {
                if (key == "file") {
                    std::filesystem::path p(val);
                    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
                    p = p.lexically_normal();
                    if (!std::filesystem::exists(p)) at.fail("scenario file '" + p.string() + "' does not exist");
                    c.scenario.file = p;
                } else if (key == "n") {
                    c.scenario.n = to_uint(val, at);
                } else if (key == "l") {
                    c.scenario.l = to_uint(val, at);
                } else if (key == "min_separation") {
                    c.scenario.min_separation = to_double(val, at);
                } else if (key == "amplitude") {
                    c.scenario.amplitude = parse_amplitude_law(val);
                } else if (key == "placement_seed") {
                    c.scenario.placement_seed = to_uint(val, at);
                } else if (key == "sigma2") {
                    c.scenario.sigma2 = to_double(val, at);
                } else {
                    at.fail("unknown scenario key '" + key + "'");
                }
            } else if (key == "constellation") {
                c.constellation = val;
            } else if (key == "selection") {
                c.selection = parse_selection_kind(val);
            } else if (key == "snr_start") {
                c.snr_start = to_double(val, at);
            } else if (key == "snr_stop") {
                c.snr_stop = to_double(val, at);
            } else if (key == "snr_step") {
                c.snr_step = to_double(val, at);
            } else if (key == "trials") {
                c.trials = to_uint(val, at);
            } else if (key == "seed") {
                c.seed = to_uint(val, at);
            } else if (key == "skip_policy") {
                c.skip_policy = parse_skip_policy(val);
            } else if (key == "threads") {
                c.threads = to_uint(val, at);
            } else if (key == "bandwidth_hz") {
                c.bandwidth_hz = to_double(val, at);
            } else if (key == "out") {
                c.out = val;
            } else if (key == "direction_seed") {
                c.direction_seed = to_uint(val, at);
            } else if (key == "step") {
                c.step = to_double(val, at);
            } else if (key == "moment_k") {
                c.moment_k = static_cast<unsigned>(to_uint(val, at));
            } else if (key == "n_list") {
                c.n_list.clear();
                std::istringstream items(val);
                std::string item;
                while (std::getline(items, item, ',')) c.n_list.push_back(to_uint(trim(item), at));
            } else if (key == "family") {
                c.family = val;
            } else {
                at.fail("unknown run key '" + key + "'");
            }
        } catch (const Error& e) {
            if (e.kind() == ErrorKind::config && std::string(e.what()).starts_with("config line")) throw;
            at.fail(e.what());
        }
    }
    if (!(c.snr_step > 0.0) || c.snr_stop < c.snr_start) {
        throw Error(ErrorKind::config, "snr grid needs snr_step > 0 and snr_stop >= snr_start");
    }
    if (c.trials < 1) throw Error(ErrorKind::config, "trials must be >= 1");
    if (c.bandwidth_hz && !(*c.bandwidth_hz > 0.0)) throw Error(ErrorKind::config, "bandwidth_hz must be positive");
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config, "cannot open config file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

std::string canonical(const RunConfig& c) { return canonical_impl(c, false); }

std::uint64_t config_hash(const RunConfig& c) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical_impl(c, true)) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::vector<double> snr_grid(const RunConfig& c) {
    std::vector<double> grid;
    const auto count = static_cast<std::size_t>(std::floor((c.snr_stop - c.snr_start) / c.snr_step + 1e-9)) + 1;
    for (std::size_t i = 0; i < count; ++i) grid.push_back(c.snr_start + static_cast<double>(i) * c.snr_step);
    return grid;
}

Scenario make_scenario(const RunConfig& c) {
    if (!c.scenario.file.empty()) return load_scenario_file(c.scenario.file);
    return random_scenario(c.scenario.placement_seed, c.scenario.n, c.scenario.l, c.scenario.min_separation,
                           c.scenario.amplitude, c.scenario.sigma2);
}

} // namespace isac
