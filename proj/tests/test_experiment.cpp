#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sbayes/distributions.hpp"
#include "sbayes/experiment.hpp"

using namespace sbayes;

namespace {

ExperimentConfig make(const std::string& kind, std::initializer_list<std::pair<const std::string, std::string>> params)
{
    ExperimentConfig c;
    c.kind = kind;
    c.params = params;
    return c;
}

bool has_error(const ValidationReport& r, const std::string& field)
{
    for (const auto& e : r.errors)
        if (e.field == field) return true;
    return false;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("number formatting round-trips")
{
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(-2.5e-10) == "-2.5e-10");
    CHECK(format_number(NAN) == "nan");
    for (double v : {1.0 / 3.0, std::sqrt(2.0), 1e-300, 123456789.123})
        CHECK(std::stod(format_number(v)) == v);

    ResultTable t{{"a", "b"}, {{1.0, 0.25}, {2.0, -1.0}}};
    CHECK(to_csv(t) == "a,b\n1,0.25\n2,-1\n");
}

TEST_CASE("config files and overrides")
{
    const auto dir = std::filesystem::temp_directory_path() / "sbayes_cfg_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "risk.cfg";
    std::ofstream(path) << "# comment line\n"
                           "n = 1000   # trailing comment\n"
                           "s=10\n"
                           "\n"
                           "b = -1, 0, 1\n"
                           "seed = 18446744073709551615\n"
                           "reps = 7\n"
                           "out = results/run\n"
                           "workers = 3\n";
    ExperimentConfig c;
    c.kind = "risk-boundary";
    load_config_file(c, path);
    CHECK(c.integer("n") == 1000);
    CHECK(c.integer("s") == 10);
    CHECK(c.numbers("b") == std::vector<double>{-1.0, 0.0, 1.0});
    CHECK(c.seed == 18446744073709551615ULL);
    CHECK(c.replicates == 7);
    CHECK(c.out == "results/run");
    CHECK(c.workers == 3);

    apply_override(c, "s=20");
    CHECK(c.integer("s") == 20);
    CHECK_THROWS_AS(apply_override(c, "nonsense"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "seed=-1"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "reps=0"), ConfigError);
    CHECK_THROWS_AS(apply_override(c, "workers=1.5"), ConfigError);
    CHECK(c.number_or("missing", 4.0) == 4.0);
    CHECK(c.text_or("procedure", "oracle") == "oracle");
    try {
        (void)c.number("absent");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(e.field() == "absent");
    }
    apply_override(c, "n=abc");
    CHECK_THROWS_AS(c.number("n"), ConfigError);

    std::ofstream(dir / "bad.cfg") << "n 1000\n";
    ExperimentConfig d;
    CHECK_THROWS_AS(load_config_file(d, dir / "bad.cfg"), ConfigError);
    CHECK_THROWS_AS(load_config_file(d, dir / "does_not_exist.cfg"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("validation")
{
    CHECK(validate(make("risk-boundary", {{"n", "1000"}, {"s", "10"}, {"b", "0,1"}})).ok());
    CHECK(has_error(validate(make("risk-boundary", {{"n", "1000"}, {"b", "0"}})), "s"));
    CHECK(has_error(validate(make("risk-boundary", {{"n", "1000"}, {"s", "10"}, {"b", "0"}, {"bogus", "1"}})), "bogus"));
    CHECK(has_error(validate(make("nonexistent", {})), "kind"));

    // b = -a* - 1 leaves the signal class.
    const double a = oracle_threshold(1000, 10, NoiseModel::gaussian());
    const auto out_of_class =
        validate(make("risk-boundary", {{"n", "1000"}, {"s", "10"}, {"b", format_number(-a - 1.0)}}));
    CHECK(has_error(out_of_class, "b"));

    CHECK(has_error(validate(make("risk-boundary",
                                  {{"n", "1000"}, {"s", "10"}, {"b", "0"}, {"procedure", "lvalue"}, {"noise", "subbotin"}, {"zeta", "1.5"}})),
                    "noise"));
    CHECK(has_error(validate(make("risk-boundary", {{"n", "1000"}, {"s", "10"}, {"b", "0"}, {"t", "1.2"}, {"procedure", "lvalue"}})), "t"));

    const auto rho_high = validate(make("lower-bound", {{"n", "10000"}, {"s", "10"}, {"rho", "1000"}}));
    CHECK(rho_high.ok());
    CHECK(rho_high.warnings.size() == 1);
    CHECK(has_error(validate(make("lower-bound", {{"n", "10000"}, {"s", "10"}, {"rho", "0.5"}})), "rho"));

    CHECK(validate(make("contraction", {})).ok());
    CHECK(has_error(validate(make("contraction", {{"n", "256"}})), "n"));
    CHECK(has_error(validate(make("coverage", {{"n", "1024"}, {"delta", "2"}})), "delta"));
    CHECK(has_error(validate(make("vb-fit", {{"n", "50"}, {"p", "10"}, {"s", "11"}})), "s"));
    CHECK(has_error(validate(make("bayes-fdr", {{"n", "100"}, {"alpha", "1.5"}})), "alpha"));
    CHECK(validate(make("mmle", {{"n", "200,400"}, {"s", "5"}})).ok());
}

TEST_CASE("runs produce fixed headers and deterministic tables")
{
    auto c = make("contraction", {{"n", "256,512,1024"}});
    const auto r = run(c);
    CHECK(r.table.header == std::vector<std::string>{"n", "term_a", "term_b", "total"});
    CHECK(r.table.rows.size() == 3);
    CHECK(r.summary.contains("slope"));

    auto rb = make("risk-boundary", {{"n", "2000"}, {"s", "20"}, {"b", "0,1"}, {"procedure", "lvalue"}});
    rb.replicates = 6;
    rb.seed = 11;
    const auto first = run(rb);
    rb.workers = 3;
    const auto threaded = run(rb);
    CHECK(to_csv(first.table) == to_csv(threaded.table));
    CHECK(first.table.header.front() == "b1");
    CHECK(first.table.header.size() == first.table.rows.front().size());

    auto pairs = make("risk-boundary", {{"n", "2000"}, {"s", "20"}, {"b_pairs", "-1:1"}, {"q", "0.5"}});
    pairs.replicates = 3;
    const auto two = run(pairs);
    REQUIRE(two.table.rows.size() == 1);
    const double lambda = two.table.rows[0][3];
    CHECK(lambda == doctest::Approx(0.5 * (normal_survival(-1.0) + normal_survival(1.0))));

    auto vb = make("vb-fit", {{"n", "40"}, {"p", "30"}, {"s", "2"}});
    vb.replicates = 3;
    const auto fit = run(vb);
    CHECK(fit.table.rows.size() == 3);
    vb.workers = 2;
    CHECK(to_csv(run(vb).table) == to_csv(fit.table));

    auto lb = make("lower-bound", {{"n", "10000"}, {"s", "10"}});
    lb.replicates = 5;
    const auto lower = run(lb);
    CHECK_FALSE(lower.warnings.empty());

    auto bad = make("vb-fit", {{"n", "20"}, {"p", "5"}, {"s", "1"}, {"signal", "1e200"}});
    bad.replicates = 1;
    CHECK_THROWS_AS(run(bad), NumericalError);
    CHECK_THROWS_AS(run(make("risk-boundary", {{"n", "1000"}})), ConfigError);
}

TEST_CASE("output files")
{
    const auto dir = std::filesystem::temp_directory_path() / "sbayes_out_test";
    std::filesystem::remove_all(dir);
    auto c = make("contraction", {{"n", "256,512"}});
    c.out = (dir / "nested" / "curve").string();
    const auto r = run(c);
    write_outputs(c, r, 0.5);
    const std::string csv = slurp(c.out + ".csv");
    CHECK(csv == to_csv(r.table));
    const auto j = nlohmann::json::parse(slurp(c.out + ".json"));
    CHECK(j["experiment"] == "contraction");
    CHECK(j["version"] == kVersion);
    CHECK(j["seed"] == 1);
    CHECK(j["config"]["n"] == "256,512");
    CHECK(j["wall_seconds"] == 0.5);
    write_outputs(c, r, 9.0);
    CHECK(slurp(c.out + ".csv") == csv);
    std::filesystem::remove_all(dir);
}
