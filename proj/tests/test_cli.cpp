#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "sgn/cli.hpp"

using namespace sgn;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("sgn-test-cli-" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream o;
    o << in.rdbuf();
    return o.str();
}

struct Run {
    int status = 0;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args, const std::string& default_config = "") {
    args.insert(args.begin(), "sparsegn");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream o, e;
    Run r;
    r.status = run_cli(static_cast<int>(argv.size()), argv.data(), default_config, o, e);
    r.out = o.str();
    r.err = e.str();
    return r;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
    const auto p = dir / "run.cfg";
    std::ofstream(p) << text;
    return p;
}

const char* small_config = R"(
[run]
checks = overlap, pointwise, gn
resolution = 256
random_tuples = 5

[function g]
family = gaussian
window = -6, 6

[function b]
family = smooth-bump
window = -1.25, 1.25

[case g-L2]
function = g
X = L:2
Y = L:2
max_ratio = 1.001

[case b-L1]
function = b
X = L:1
Y = L:1
)";

}  // namespace

TEST_CASE("numbers accept pi forms") {
    CHECK(detail::parse_real("pi", "t") == M_PI);
    CHECK(detail::parse_real("-pi/2", "t") == -M_PI / 2);
    CHECK(detail::parse_real("3pi/2", "t") == 3 * M_PI / 2);
    CHECK(detail::parse_real("1.5*pi", "t") == 1.5 * M_PI);
    CHECK(detail::parse_real(" 2.25 ", "t") == 2.25);
    CHECK_THROWS_AS(detail::parse_real("1 - pi", "t"), ConfigError);
    CHECK_THROWS_AS(detail::parse_real("abc", "t"), ConfigError);
    CHECK_THROWS_AS(detail::parse_real("", "t"), ConfigError);
}

TEST_CASE("check selection") {
    CHECK_FALSE(parse_checks("none").any());
    const auto all = parse_checks("all");
    CHECK(to_string(all) == "overlap,pointwise,observation,operator-norm,modular,young,gn,chain,induction,norms");
    const auto some = parse_checks("gn, modular");
    CHECK(some.gn);
    CHECK(some.modular);
    CHECK_FALSE(some.overlap);
    CHECK(to_string(some) == "modular,gn");
    CHECK_THROWS_AS(parse_checks("gn,bogus"), ConfigError);
}

TEST_CASE("configuration errors") {
    auto bad = [](const std::string& text) {
        INFO(text);
        CHECK_THROWS_AS(validate(parse_config_text(text)), ConfigError);
    };
    bad("[run]\nchecks = none\n");
    bad("[run]\nbogus = 1\n");
    bad("[nonsense]\nx = 1\n");
    bad("[function g]\nfamily = gaussian\n");
    bad("[function g]\nfamily = gaussian\nwindow = -1, 1\ncolour = red\n");
    bad("[function g]\nfamily = gaussian\nwindow = -1, 1\n[function g]\nfamily = gaussian\nwindow = -1, 1\n");
    bad("[function g]\nfamily = gaussian\ndim = 2\nwindow = -3, 3\n");
    bad("[function g]\nfamily = parabola\nwindow = -1, 1\n");
    bad("[function g]\nfamily = gaussian\nwindow = -1, 1\nspot_x = 0\n");
    bad("[case c]\nfunction = missing\nX = L:1\nY = L:1\n");
    bad("[function g]\nfamily = gaussian\nwindow = -1, 1\n[case c]\nfunction = g\nX = L:1/2\nY = L:1\n");
    bad("[function g]\nfamily = gaussian\nwindow = -1, 1\n[case c]\nfunction = g\nX = L:1\n");
    bad("[run]\nformat = xml\n");
    bad("[run]\nresolution = 4\n");
    bad("[run\n");
}

TEST_CASE("valid configuration round trip") {
    const auto cfg = parse_config_text(small_config);
    validate(cfg);
    REQUIRE(cfg.functions.size() == 2);
    REQUIRE(cfg.cases.size() == 2);
    CHECK(cfg.functions[1].spec.family == Family::smooth_bump);
    CHECK(cfg.cases[0].max_ratio == 1.001);
    CHECK(cfg.cases[1].X == SpaceDescriptor::parse("L:1"));
    CHECK(cfg.resolution == 256);
    CHECK(to_string(cfg.flags) == "overlap,pointwise,gn");
    const auto cases = resolve_cases(cfg);
    CHECK(cases[0].n == 256);
    CHECK(cases[0].u.window.b == 6.0);
}

TEST_CASE("bundled default configuration is valid and spans the corpus") {
    const auto cfg = load_config(std::string(SGN_SOURCE_DIR) + "/configs/default.cfg");
    validate(cfg);
    std::size_t one = 0, two = 0;
    std::set<Family> families;
    for (const auto& f : cfg.functions) {
        if (f.spec.dim == 1) {
            ++one;
            families.insert(f.spec.family);
        } else {
            ++two;
            CHECK(f.spec.compactly_supported());
        }
    }
    CHECK(one >= 20);
    CHECK(two >= 5);
    CHECK(families.size() == 4);
    CHECK(cfg.resolution == 1024);
    CHECK(cfg.resolution_2d == 128);
    CHECK(cfg.flags.any());
}

TEST_CASE("random corpus members follow the seed") {
    const auto a = random_functions(7, 6), b = random_functions(7, 6), c = random_functions(8, 6);
    REQUIRE(a.size() == 6);
    bool differs = false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].id == "random-" + std::to_string(i));
        CHECK(a[i].spec.width == b[i].spec.width);
        CHECK(a[i].spec.compactly_supported());
        CHECK(a[i].spec.window.a < a[i].spec.center - a[i].spec.width);
        CHECK(a[i].spec.window.b > a[i].spec.center + a[i].spec.width);
        differs = differs || a[i].spec.width != c[i].spec.width;
    }
    CHECK(differs);
}

TEST_CASE("CSV quoting") {
    CHECK(detail::csv_line({"a", "b c", "x,y", "say \"hi\"", ""}) == "a,b c,\"x,y\",\"say \"\"hi\"\"\",\n");
    const auto table = render_table({"id", "v"}, {{"p", "1"}, {"q,r", "2"}}, ReportFormat::csv, "case");
    CHECK(table == "id,v\np,1\n\"q,r\",2\n");
    const auto text = render_table({"id", "v"}, {{"p", "1"}}, ReportFormat::text, "case");
    CHECK(text == "case p\n  v = 1\nend\n");
}

TEST_CASE("run-length encoding round trip") {
    std::mt19937 rng(12);
    std::bernoulli_distribution bit(0.3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> mask(static_cast<std::size_t>(trial * 7 + 1));
        for (auto& m : mask) m = bit(rng);
        const auto runs = run_lengths(mask);
        std::size_t total = 0;
        for (auto r : runs) total += r;
        CHECK(total == mask.size());
        CHECK(expand_runs(runs) == mask);
    }
    CHECK(run_lengths({1, 1, 0}) == std::vector<std::size_t>{0, 2, 1});
}

TEST_CASE("family serialization round trip") {
    TestFunctionSpec s1;
    s1.family = Family::modulated_bump;
    s1.frequency = 5.0;
    s1.window = {-1.1, 1.1};
    const auto u1 = make_test_function(s1, Grid1D(-1.1, 1.1, 512));
    TestFunctionSpec s2;
    s2.family = Family::smooth_bump;
    s2.dim = 2;
    s2.window = s2.window_y = {-1.25, 1.25};
    const auto u2 = make_test_function_2d(s2, Grid2D(Grid1D(-1.25, 1.25, 64), Grid1D(-1.25, 1.25, 64)), 2);

    const std::vector<FamilyRecord> recs = {family_record("one", build_family_1d(u1)),
                                            family_record("two", build_family_2d(u2))};
    const auto text = write_families(recs);
    const auto back = read_families(text);
    REQUIRE(back.size() == 2);
    CHECK(write_families(back) == text);
    CHECK(back[0].id == "one");
    CHECK(back[0].intervals.size() == recs[0].intervals.size());
    for (std::size_t i = 0; i < recs[0].intervals.size(); ++i) {
        CHECK(back[0].intervals[i].z == recs[0].intervals[i].z);
        CHECK(back[0].intervals[i].y == recs[0].intervals[i].y);
        CHECK(back[0].intervals[i].k == recs[0].intervals[i].k);
        CHECK(back[0].intervals[i].sign == recs[0].intervals[i].sign);
    }
    CHECK(back[1].dim == 2);
    CHECK(back[1].axis == 2);
    REQUIRE(back[1].slabs.size() == recs[1].slabs.size());
    for (std::size_t i = 0; i < recs[1].slabs.size(); ++i) {
        CHECK(back[1].slabs[i].mask == recs[1].slabs[i].mask);
        CHECK(back[1].slabs[i].delta == recs[1].slabs[i].delta);
        CHECK(back[1].slabs[i].unresolved == recs[1].slabs[i].unresolved);
        CHECK(back[1].slabs[i].pieces.size() == recs[1].slabs[i].pieces.size());
    }
    CHECK_THROWS_AS(read_families("family x\n  bogus line\nend\n"), ConfigError);
    CHECK_THROWS_AS(read_families("family x\n  dim = 1\n"), ConfigError);
}

TEST_CASE("atomic write leaves no temporary file") {
    const auto dir = scratch("atomic");
    write_atomic(dir / "a.txt", "first");
    write_atomic(dir / "a.txt", "second");
    CHECK(slurp(dir / "a.txt") == "second");
    CHECK_FALSE(fs::exists(dir / "a.txt.tmp"));
    CHECK_THROWS_AS(write_atomic(dir / "missing" / "a.txt", "x"), ConfigError);
}

TEST_CASE("exit status 2 on configuration and output errors") {
    const auto dir = scratch("status2");
    CHECK(run({"--config", (dir / "nope.cfg").string()}).status == 2);
    CHECK(run({"--config", write_config(dir, "[run]\nchecks = none\n").string()}).status == 2);
    CHECK(run({"--config", write_config(dir, "[run]\nwhat = 1\n").string()}).status == 2);
    const auto cfg = write_config(dir, small_config).string();
    CHECK(run({"--config", cfg, "--checks", "none"}).status == 2);
    CHECK(run({"--config", cfg, "--format", "xml"}).status == 2);
    CHECK(run({"--config", cfg, "--resolution", "3"}).status == 2);
    CHECK(run({"--bogus-flag"}).status == 2);
    std::ofstream(dir / "file") << "x";
    const auto r = run({"--config", cfg, "--checks", "gn", "--out", (dir / "file").string()});
    CHECK(r.status == 2);
    CHECK(r.err.find("output error") != std::string::npos);
    CHECK(run({"--help"}).status == 0);
}

TEST_CASE("forced overlap violation gives status 1 naming the node") {
    const auto dir = scratch("violation");
    const auto cfg = write_config(dir, "[run]\nchecks = overlap\nresolution = 512\n"
                                       "[function g]\nfamily = gaussian\nwindow = -6, 6\nmax_overlap = 2\n");
    const auto r = run({"--config", cfg.string(), "--out", (dir / "out").string()});
    CHECK(r.status == 1);
    INFO(r.err);
    CHECK(r.err.find("violation: overlap g") != std::string::npos);
    CHECK(r.err.find("node") != std::string::npos);
    const auto report = slurp(dir / "out" / "checks_report.csv");
    CHECK(report.find("overlap,g,512,3,2,fail") != std::string::npos);
}

TEST_CASE("small run: status 0, reports written, byte-identical reruns") {
    const auto dir = scratch("small");
    const auto cfg = write_config(dir, small_config).string();
    const auto a = run({"--config", cfg, "--out", (dir / "a").string()});
    INFO(a.err);
    CHECK(a.status == 0);
    CHECK(a.out.find("pass") != std::string::npos);
    const auto b = run({"--config", cfg, "--out", (dir / "b").string()});
    CHECK(b.status == 0);
    for (const auto& name : report_files(ReportFormat::csv)) {
        INFO(name);
        REQUIRE(fs::exists(dir / "a" / name));
        CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
    }
    const auto gn = slurp(dir / "a" / "gn_report.csv");
    CHECK(gn.rfind("case-id,mode,j,k,X,Y,Z,lhs,rhs-x,rhs-y,ratio,overlap-max,pointwise-max,verdicts,", 0) == 0);
    CHECK(gn.find("\ng-L2,pure,1,2,L:2,L:2,L:2,") != std::string::npos);

    const auto t = run({"--config", cfg, "--out", (dir / "t").string(), "--format", "text", "--checks", "gn"});
    CHECK(t.status == 0);
    const auto text = slurp(dir / "t" / "gn_report.txt");
    CHECK(text.rfind("case g-L2\n", 0) == 0);
    CHECK(text.find("\nend\n") != std::string::npos);
}

TEST_CASE("resolution override and seed reach the run") {
    const auto dir = scratch("override");
    const auto cfg = write_config(dir, std::string(small_config) + "\n[case g-fixed]\nfunction = g\nX = L:2\nY = L:2\nn = 128\n");
    const auto r = run({"--config", cfg.string(), "--out", (dir / "o").string(), "--checks", "gn", "--resolution", "512"});
    CHECK(r.status == 0);
    const auto gn = slurp(dir / "o" / "gn_report.csv");
    std::istringstream lines(gn);
    std::string line;
    std::getline(lines, line);
    std::size_t rows = 0;
    while (std::getline(lines, line)) {
        ++rows;
        CHECK(line.find(",512,") != std::string::npos);
    }
    CHECK(rows == 3);

    const auto s1 = run({"--config", cfg.string(), "--out", (dir / "s1").string(), "--checks", "induction", "--seed", "1"});
    const auto s2 = run({"--config", cfg.string(), "--out", (dir / "s2").string(), "--checks", "induction", "--seed", "2"});
    CHECK(s1.status == 0);
    CHECK(s2.status == 0);
    CHECK(slurp(dir / "s1" / "checks_report.csv") != slurp(dir / "s2" / "checks_report.csv"));
}

TEST_CASE("default config text is used without --config") {
    const auto dir = scratch("default");
    const auto r = run({"--out", (dir / "o").string(), "--checks", "gn"}, small_config);
    CHECK(r.status == 0);
    CHECK(fs::exists(dir / "o" / "gn_report.csv"));
}
