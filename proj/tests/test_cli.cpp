#include <catch_amalgamated.hpp>

#include <unistd.h>

#include "cli.hpp"

using namespace ptlattice;
using Catch::Matchers::WithinAbs;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result invoke(std::vector<std::string> args) {
    args.insert(args.begin(), "ptlattice");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("ptlattice_test_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str() const { return path.string(); }
};

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

} // namespace

TEST_CASE("classify prints the regime as JSON", "[cli]") {
    const auto r = invoke({"classify", "--kappa", "1", "--sigma", "1", "--rho", "0.7", "--phi", "pi/2", "--g", "0.05"});
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j["regime"] == "convective");
    CHECK(j["validated"] == true);
    CHECK_THAT(j["v_g"].get<double>(), WithinAbs(-1.4, 1e-12));

    const auto a = invoke({"classify", "--rho", "0.3", "--g", "0.05", "--method", "asymptotic"});
    REQUIRE(a.code == 0);
    CHECK(json::parse(a.out)["regime"] == "absolute");
}

TEST_CASE("bands writes the dispersion table", "[cli]") {
    const auto r = invoke({"bands", "--kappa", "1", "--sigma", "0.8", "--rho", "0.6", "--g", "0", "--nq", "4"});
    REQUIRE(r.code == 0);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 5);
    CHECK(ls[0] == io::band_header);
    // row 2 is q = pi
    std::vector<double> v;
    std::istringstream row(ls[3]);
    for (std::string cell; std::getline(row, cell, ',');) v.push_back(std::stod(cell));
    REQUIRE(v.size() == 5);
    CHECK_THAT(v[0], WithinAbs(std::numbers::pi, 1e-15));
    CHECK_THAT(v[1] - v[3], WithinAbs(0.4, 1e-12));

    TempDir dir("bands");
    const auto path = (dir.path / "b.csv").string();
    REQUIRE(invoke({"bands", "--nq", "4", "--sigma", "0.8", "--rho", "0.6", "--out", path}).code == 0);
    CHECK(slurp(path) == r.out);
}

TEST_CASE("exit codes", "[cli]") {
    CHECK(invoke({}).code == 1);
    CHECK(invoke({"bands", "--kappa", "-1"}).code == 1);
    CHECK(invoke({"bands", "--phi", "pie"}).code == 1);
    CHECK(invoke({"bands", "--nq", "1"}).code == 1);
    CHECK(invoke({"reproduce", "fig9"}).code == 1);
    CHECK(invoke({"classify", "--method", "guess"}).code == 1);
    CHECK(invoke({"--help"}).code == 0);

    TempDir dir("overflow");
    const auto r = invoke({"propagate", "--g", "50", "--N", "40", "--w", "5", "--t-end", "10", "--out-dir", dir.str()});
    CHECK(r.code == 2);
    CHECK(r.err.find("numeric failure") != std::string::npos);
}

TEST_CASE("config files", "[cli]") {
    TempDir dir("config");
    const auto cfg = (dir.path / "c.json").string();
    std::ofstream(cfg) << R"({"kappa": 1, "sigma": 1, "rho": 0.3, "phi": "pi/2", "g": 0.05})";
    auto r = invoke({"classify", "--config", cfg});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["regime"] == "absolute");

    // explicit flags win over the file
    r = invoke({"classify", "--config", cfg, "--rho", "0.7"});
    REQUIRE(r.code == 0);
    CHECK(json::parse(r.out)["regime"] == "convective");
    r = invoke({"classify", "--rho", "0.7", "--config", cfg});
    CHECK(json::parse(r.out)["regime"] == "convective");

    std::ofstream(cfg) << R"({"kappa": 1, "gain": 0.05})";
    r = invoke({"classify", "--config", cfg});
    CHECK(r.code == 1);
    CHECK(r.err.find("gain") != std::string::npos);

    std::ofstream(cfg) << R"({"t_end": 2, "N": 40, "w": 5, "ray_v": [0, 0.5]})";
    r = invoke({"propagate", "--config", cfg, "--out-dir", dir.str()});
    REQUIRE(r.code == 0);
    const auto j = json::parse(slurp(dir.path / "propagate.json"));
    CHECK(j["t_end"] == 2.0);
    CHECK(j["rays"].size() == 2);

    CHECK(invoke({"classify", "--config", (dir.path / "missing.json").string()}).code == 1);
}

TEST_CASE("angle literals", "[cli]") {
    const double pi = std::numbers::pi;
    CHECK(cli::parse_angle("pi", "x") == pi);
    CHECK(cli::parse_angle("-pi/4", "x") == -pi / 4);
    CHECK(cli::parse_angle("3pi/2", "x") == 3 * pi / 2);
    CHECK(cli::parse_angle("0.5*pi", "x") == 0.5 * pi);
    CHECK(cli::parse_angle("1.25", "x") == 1.25);
    CHECK_THROWS_AS(cli::parse_angle("pi/0", "x"), ValidationError);
    CHECK_THROWS_AS(cli::parse_angle("2pix", "x"), ValidationError);
}

TEST_CASE("outputs are deterministic and carry stable headers", "[cli]") {
    TempDir a("det_a"), b("det_b");
    for (const auto* d : {&a, &b}) {
        REQUIRE(invoke({"propagate", "--rho", "0.3", "--g", "0.05", "--N", "60", "--w", "5", "--t-end", "5",
                        "--out-dir", d->str()}).code == 0);
        REQUIRE(invoke({"floquet", "--nq", "8", "--steps", "200", "--out-dir", d->str()}).code == 0);
        REQUIRE(invoke({"spectrum", "--N", "20", "--Ng", "6", "--rho", "2", "--g", "0.5", "--out-dir", d->str()}).code == 0);
    }
    const std::vector<std::pair<std::string, std::string>> files{
        {"snapshots.csv", io::snapshot_header}, {"ray0.csv", io::ray_header},       {"ray1.csv", io::ray_header},
        {"quasi_energies.csv", io::band_header}, {"rwa_bands.csv", io::band_header}, {"spectrum.csv", io::spectrum_header},
        {"propagate.json", "{"},                 {"rwa_params.json", "{"},           {"metrics.json", "{"}};
    for (const auto& [name, header] : files) {
        INFO(name);
        const auto x = slurp(a.path / name);
        CHECK(x == slurp(b.path / name));
        CHECK(lines(x).at(0) == header);
    }
    const auto m = json::parse(slurp(a.path / "metrics.json"));
    CHECK(m["size"] == 42);
    CHECK(m["residuals_ok"] == true);
    const auto spec = lines(slurp(a.path / "spectrum.csv"));
    CHECK(spec.size() == 43);
}

TEST_CASE("reproduce writes the figure tables", "[cli]") {
    TempDir dir("fig2");
    const auto r = invoke({"reproduce", "fig2", "--out-dir", dir.str()});
    REQUIRE(r.code == 0);
    for (const char* tag : {"a", "b", "c"}) {
        const auto csv = lines(slurp(dir.path / (std::string("fig2") + tag + "_bands.csv")));
        CHECK(csv.size() == 513);
        CHECK(fs::exists(dir.path / (std::string("fig2") + tag + ".json")));
    }
    const auto c = json::parse(slurp(dir.path / "fig2c.json"));
    CHECK_THAT(c["params"]["g"].get<double>(), WithinAbs(0.6, 1e-12));
    CHECK_THAT(c["E_plus_pi"][1].get<double>(), WithinAbs(std::sqrt(0.32), 1e-12));
}
