#include "helpers.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "isac/commands.hpp"
#include "isac/config.hpp"

using namespace isac;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run cli(std::vector<std::string> args) {
    args.insert(args.begin(), "isac-crb");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("isac_cli_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(path / name) << text;
        return path / name;
    }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const char* kSmallConfig = R"(# tiny sweep
[scenario]
n = 16
l = 2
min_separation = 2
placement_seed = 4

[waveforms]
ofdm
sc
afdm:1/16,0.125

[run]
constellation = qam16
snr_start = 0
snr_stop = 10
snr_step = 5
trials = 300
seed = 9
bandwidth_hz = 100e6
)";

std::vector<std::string> csv_line(const std::string& text, std::size_t row) {
    std::istringstream in(text);
    std::string line;
    for (std::size_t i = 0; i <= row; ++i) std::getline(in, line);
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (char ch : line) {
        if (ch == '"') quoted = !quoted;
        else if (ch == ',' && !quoted) fields.push_back(std::exchange(cur, {}));
        else cur += ch;
    }
    fields.push_back(cur);
    return fields;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("bandwidth subcommand") {
    auto r = cli({"bandwidth", "--waveform", "ofdm", "--n", "16"});
    REQUIRE(r.code == 0);
    CHECK(std::stod(csv_line(r.out, 1)[5]) == 0.0);
    r = cli({"bandwidth", "--waveform", "sc", "--n", "64"});
    REQUIRE(r.code == 0);
    const double n = 64;
    CHECK(std::stod(csv_line(r.out, 1)[5]) == doctest::Approx(std::sqrt((n * n - 1) / 12.0) / n).epsilon(1e-9));
    r = cli({"bandwidth", "--waveform", "afdm:1/2,0.1", "--n", "16"});
    REQUIRE(r.code == 0);
    CHECK(csv_line(r.out, 1)[0] == "afdm:1/2,0.1");
    CHECK(std::stod(csv_line(r.out, 1)[5]) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(cli({"bandwidth", "--waveform", "otfs:3x3", "--n", "16"}).code == exit_config);
}

TEST_CASE("sweep output is reproducible and thread independent") {
    TempDir dir("sweep");
    const auto cfg = dir.write("run.cfg", kSmallConfig);
    const auto a = cli({"sweep", "--config", cfg.string()});
    const auto b = cli({"sweep", "--config", cfg.string(), "--threads", "3"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(csv_line(a.out, 0) == std::vector<std::string>{"snr_db", "waveform", "constellation", "crb_mc",
                                                         "crb_jensen", "stderr", "trials_used", "trials_skipped"});
    // 3 SNR points x 3 waveforms
    CHECK(std::count(a.out.begin(), a.out.end(), '\n') == 10);
    CHECK(cli({"sweep", "--config", cfg.string(), "--seed", "10"}).out != a.out);

    const auto out = dir.path / "res.csv";
    REQUIRE(cli({"sweep", "--config", cfg.string(), "--out", out.string()}).code == 0);
    CHECK(slurp(out) == a.out);
    const std::string meta = slurp(out.string() + ".meta");
    CHECK(meta.find("seed = 9") != std::string::npos);
    CHECK(meta.find("config_hash = ") != std::string::npos);
    CHECK(meta.find("range_factor_m2 = ") != std::string::npos);
    CHECK(meta.find("paired_diff,") != std::string::npos);
}

TEST_CASE("exit codes") {
    TempDir dir("codes");
    CHECK(cli({"sweep"}).code == exit_config);
    CHECK(cli({"sweep", "--config", (dir.path / "missing.cfg").string()}).code == exit_config);
    const auto bad = dir.write("bad.cfg", "[run]\ntrials = many\n");
    const auto r = cli({"sweep", "--config", bad.string()});
    CHECK(r.code == exit_config);
    CHECK(r.err.find("line 2") != std::string::npos);

    dir.write("dup.scn", "n 16\n1.5 1 0\n1.5 0 1\n");
    const auto dup = dir.write("dup.cfg", "[scenario]\nfile = dup.scn\n[waveforms]\nofdm\n[run]\ntrials = 10\n");
    CHECK(cli({"sweep", "--config", dup.string()}).code == exit_degenerate);

    // N = 4 single carrier with QPSK: a pure-tone draw (1 in 16) lights a single bin, so J has rank 2.
    dir.write("tiny.scn", "n 4\n0.3 1 0\n");
    const std::string tiny_cfg = "[scenario]\nfile = tiny.scn\n[waveforms]\nsc\n[run]\n"
                                 "constellation = psk4\nsnr_start = 0\nsnr_stop = 0\n";
    const auto tiny = dir.write("tiny.cfg", tiny_cfg + "trials = 1\n");
    int zero = 0, four = 0;
    for (int seed = 1; seed <= 96; ++seed) {
        const int code = cli({"sweep", "--config", tiny.string(), "--seed", std::to_string(seed)}).code;
        zero += code == exit_ok;
        four += code == exit_no_valid_draws;
    }
    CHECK(zero > 0);
    CHECK(four > 0);
    CHECK(zero + four == 96);
    const auto strict = dir.write("strict.cfg", tiny_cfg + "trials = 400\nskip_policy = strict\n");
    CHECK(cli({"sweep", "--config", strict.string()}).code == exit_no_valid_draws);
    const auto skip = dir.write("skip.cfg", tiny_cfg + "trials = 400\n");
    const auto ok = cli({"sweep", "--config", skip.string()});
    REQUIRE(ok.code == exit_ok);
    CHECK(std::stoul(csv_line(ok.out, 1)[7]) > 0);
}

TEST_CASE("validate subcommand") {
    TempDir dir("validate");
    const auto ok = cli({"validate"});
    CHECK(ok.code == exit_ok);
    CHECK(ok.out.find("FAIL") == std::string::npos);

    CMatrix u = numerics::dft_matrix(8).adjoint();
    u(3, 3) += Complex(0.01, 0);
    const auto basis = dir.path / "broken.basis";
    write_basis_file(basis, u);
    const auto r = cli({"validate", "--basis-file", basis.string()});
    CHECK(r.code == exit_validation);
    CHECK(r.out.find("FAIL  unitarity custom:" + basis.string()) != std::string::npos);

    const auto dup = dir.write("dup.scn", "n 16\n1.5 1 0\n1.5 0 1\n");
    CHECK(cli({"validate", "--scenario-file", dup.string()}).code == exit_validation);
}

TEST_CASE("other subcommands run") {
    TempDir dir("misc");
    const auto cfg = dir.write("run.cfg", kSmallConfig);
    auto r = cli({"gap", "--config", cfg.string(), "--trials", "200"});
    CHECK(r.code == 0);
    CHECK(csv_line(r.out, 1)[0] == "ofdm");
    CHECK(std::stod(csv_line(r.out, 1)[3]) == 0.0);
    r = cli({"geodesic", "--config", cfg.string(), "--trials", "100"});
    CHECK(r.code == 0);
    CHECK(r.out.find("d2_r2_closed,") != std::string::npos);
    const auto sc = dir.write("scale.cfg", std::string(kSmallConfig) + "n_list = 16,32\nmoment_k = 1\n");
    r = cli({"scaling", "--config", sc.string(), "--trials", "100"});
    CHECK(r.code == 0);
    CHECK(r.out.find("z_slope") != std::string::npos);
}

TEST_CASE("canonical config round trip") {
    TempDir dir("canon");
    const auto cfg = load_config(dir.write("run.cfg", kSmallConfig));
    const auto again = parse_config(canonical(cfg), dir.path);
    CHECK(canonical(again) == canonical(cfg));
    CHECK(config_hash(again) == config_hash(cfg));
    RunConfig threaded = cfg;
    threaded.threads = 8;
    threaded.out = "x.csv";
    CHECK(config_hash(threaded) == config_hash(cfg));
    RunConfig other = cfg;
    other.seed = 10;
    CHECK(config_hash(other) != config_hash(cfg));
}

}
