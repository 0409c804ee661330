#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "lrcone/commands.hpp"
#include "lrcone/config.hpp"
#include "lrcone/output.hpp"

using namespace lrcone;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("lrcone_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spill(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

ExperimentConfig from_text(const std::string& text, const fs::path& out) {
    auto c = resolve_config(parse_config(text));
    c.out_dir = out.string();
    return c;
}

std::string error_of(const std::string& text) {
    try {
        resolve_config(parse_config(text));
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(LRCONE_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// body after the metadata lines
std::string csv_body(const std::string& text) {
    std::istringstream in(text);
    std::string line, body;
    while (std::getline(in, line))
        if (line.empty() || line[0] != '#') body += line + "\n";
    return body;
}

}  // namespace

TEST(Config, ParsesValues) {
    const auto c = parse_config(
        "# comment\n"
        "field.kind = sturmian   # trailing\n"
        "field.lambda = 12\n"
        "field.pattern = [0.25, -0.25]\n"
        "probe = \"outside_probability\"\n");
    EXPECT_EQ(std::get<std::string>(c.entries.at("field.kind")), "sturmian");
    EXPECT_EQ(std::get<double>(c.entries.at("field.lambda")), 12.0);
    EXPECT_EQ(std::get<std::vector<double>>(c.entries.at("field.pattern")), (std::vector<double>{0.25, -0.25}));
    EXPECT_EQ(std::get<std::string>(c.entries.at("probe")), "outside_probability");
}

TEST(Config, SerializeRoundTrip) {
    const auto c = resolve_config(parse_config("field.lambda = 0.1\nt = [1, 2.5, 1e-3]\nfield.kind = dimer\n"));
    const auto again = resolve_config(parse_config(serialize_config(c.resolved)));
    EXPECT_EQ(again.resolved, c.resolved);
    EXPECT_EQ(serialize_config(again.resolved), serialize_config(c.resolved));
    EXPECT_EQ(again.field, c.field);
}

TEST(Config, DefaultsFilled) {
    const auto c = resolve_config(Config{});
    EXPECT_EQ(c.field.kind, FieldKind::sturmian);
    EXPECT_EQ(c.field.lambda, 1.0);
    EXPECT_EQ(c.field.rotation, kGoldenRotation);
    EXPECT_EQ(c.t.points().size(), 16u);
    EXPECT_EQ(c.delta.points().size(), 200u);
    EXPECT_EQ(c.workers, 1u);
    EXPECT_FALSE(c.resolved.contains("out"));
    EXPECT_FALSE(c.resolved.contains("workers"));
    EXPECT_TRUE(c.resolved.contains("field.lambda"));
}

TEST(Config, ErrorsNameTheKey) {
    EXPECT_NE(error_of("fild.lambda = 3\n").find("fild.lambda"), std::string::npos);
    EXPECT_NE(error_of("field.lambda = abc\n").find("field.lambda"), std::string::npos);
    EXPECT_NE(error_of("t = [1, 2]\nt.min = 3\n").find("'t'"), std::string::npos);
    EXPECT_NE(error_of("field.kind = cantor\n").find("field.kind"), std::string::npos);
    EXPECT_NE(error_of("t.min = 0\nt.spacing = log\n").find("t.min"), std::string::npos);
    EXPECT_NE(error_of("field.lambda = 1\nfield.lambda = 2\n").find("given twice"), std::string::npos);
    EXPECT_NE(error_of("just words\n").find("line 1"), std::string::npos);
    EXPECT_NE(error_of("workers = 0\n").find("workers"), std::string::npos);
}

TEST(Config, GridForms) {
    const auto c = resolve_config(parse_config("t.min = 1\nt.max = 100\nt.count = 3\nt.spacing = log\nbeta = [0.5]\n"));
    const auto t = c.t.points();
    ASSERT_EQ(t.size(), 3u);
    EXPECT_DOUBLE_EQ(t[0], 1.0);
    EXPECT_NEAR(t[1], 10.0, 1e-12);
    EXPECT_DOUBLE_EQ(t[2], 100.0);
    EXPECT_EQ(c.beta.points(), std::vector<double>{0.5});
}

TEST(Config, EnvironmentOverrides) {
    auto c = resolve_config(parse_config("out = a\nworkers = 2\n"));
    EXPECT_EQ(c.out_dir, "a");
    ::setenv("LRCONE_OUT", "from_env", 1);
    ::setenv("LRCONE_WORKERS", "5", 1);
    apply_environment(c);
    EXPECT_EQ(c.out_dir, "from_env");
    EXPECT_EQ(c.workers, 5u);
    ::setenv("LRCONE_WORKERS", "zero", 1);
    EXPECT_THROW(apply_environment(c), ConfigError);
    ::unsetenv("LRCONE_OUT");
    ::unsetenv("LRCONE_WORKERS");
}

TEST(ReflectionPlan, MinimumLength) {
    // 2*100 + 10*cbrt(100) = 246.4 -> 247, + 32 + 1
    EXPECT_EQ(minimum_safe_length(100.0, Scale::transport, 32), 280u);
    EXPECT_EQ(minimum_safe_length(0.0, Scale::transport, 32), 33u);
    EXPECT_NO_THROW(check_reflection_plan(280, 100.0, Scale::transport, 32));
    try {
        check_reflection_plan(279, 100.0, Scale::transport, 32);
        FAIL() << "short chain accepted";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("minimum N = 280"), std::string::npos) << e.what();
    }
}

TEST(Output, Sha256KnownVectors) {
    EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Output, CsvCarriesMetadata) {
    const auto c = resolve_config(parse_config("field.lambda = 2\n"));
    Table t({"a", "b"});
    t.add_row({"1", "2"});
    EXPECT_THROW(t.add_row({"1"}), std::logic_error);
    OutputMeta meta{"demo", &c.resolved};
    const std::string text = render_csv(t, meta);
    EXPECT_EQ(text.rfind("# lrcone demo\n# status: ok\n", 0), 0u);
    EXPECT_NE(text.find("# sha256: " + sha256_hex("a,b\n1,2\n")), std::string::npos);
    EXPECT_NE(text.find("# config: field.lambda = 2\n"), std::string::npos);
    EXPECT_EQ(csv_body(text), "a,b\n1,2\n");
}

TEST(Commands, FieldOutput) {
    const auto dir = scratch("field");
    const auto out = cmd_field(from_text("field.length = 5\n", dir));
    EXPECT_EQ(out.exit_code, 0);
    EXPECT_EQ(csv_body(slurp(dir / "field.csv")), "x,h_x\n1,1\n2,0\n3,1\n4,1\n5,0\n");
    const auto json = nlohmann::json::parse(slurp(dir / "field.json"));
    EXPECT_EQ(json["status"], "ok");
    EXPECT_EQ(json["result"]["values"].size(), 5u);
}

TEST(Commands, UnknownCommand) {
    EXPECT_THROW(run_command("nope", resolve_config(Config{})), ConfigError);
}

TEST(Commands, FrontRejectsShortChain) {
    const auto dir = scratch("short");
    EXPECT_THROW(cmd_front(from_text("field.length = 100\nt = [100]\n", dir)), ConfigError);
}

TEST(Commands, OracleDefaultsPass) {
    const auto dir = scratch("oracle");
    const auto out = cmd_oracle(from_text("oracle.sites = 5\noracle.times = [1]\n", dir));
    EXPECT_EQ(out.exit_code, 0);
    const auto json = nlohmann::json::parse(slurp(dir / "oracle.json"));
    EXPECT_TRUE(json["result"]["all_passed"].get<bool>());
}

TEST(Commands, FitPreconditionFailureSetsStatus) {
    // too few times for a fit
    const auto dir = scratch("fit");
    const auto out = cmd_fit_alpha(from_text("field.length = 200\nt = [5]\nbeta = [0.5]\n", dir));
    EXPECT_EQ(out.exit_code, 1);
    const auto json = nlohmann::json::parse(slurp(dir / "fit_alpha.json"));
    EXPECT_EQ(json["status"].get<std::string>().rfind("failed", 0), 0u);
}

TEST(Commands, AsymptoticExponent) {
    EXPECT_TRUE(std::isnan(asymptotic_exponent(1.0)));
    EXPECT_NEAR(asymptotic_exponent(12.0), 2.0 * std::log(1.0 + 0.6180339887498949) / std::log(12.0), 1e-15);
}

TEST(Commands, DeterministicAcrossRunsAndWorkers) {
    const std::string text = "field.lambda = 4\nfield.length = 300\nt.min = 1\nt.max = 40\nt.count = 6\ndelta.max = 100\ndelta.count = 100\n";
    std::string reference;
    for (unsigned w : {1u, 1u, 3u}) {
        const auto dir = scratch("det" + std::to_string(w));
        auto c = from_text(text, dir);
        c.workers = w;
        cmd_cone(c);
        const std::string bytes = slurp(dir / "cone.csv") + slurp(dir / "cone_fit.json");
        if (reference.empty()) reference = bytes;
        EXPECT_EQ(bytes, reference) << "workers " << w;
    }
}

TEST(Binary, ExitCodes) {
    const auto dir = scratch("bin");
    spill(dir / "good.cfg", "field.length = 8\n");
    spill(dir / "bad.cfg", "field.lenght = 8\n");
    spill(dir / "short.cfg", "field.length = 10\nt = [50]\n");
    const std::string out = " --out " + (dir / "o").string();
    EXPECT_EQ(run_cli("field --config " + (dir / "good.cfg").string() + out), 0);
    EXPECT_TRUE(fs::exists(dir / "o" / "field.csv"));
    EXPECT_EQ(run_cli("field --config " + (dir / "bad.cfg").string() + out), 2);
    EXPECT_EQ(run_cli("front --config " + (dir / "short.cfg").string() + out), 2);
    EXPECT_EQ(run_cli("field --config " + (dir / "missing.cfg").string() + out), 2);
    EXPECT_NE(run_cli("bogus --config " + (dir / "good.cfg").string()), 0);
    EXPECT_NE(run_cli("field"), 0);
}

TEST(Binary, OutFlagBeatsEnvironment) {
    const auto dir = scratch("prec");
    spill(dir / "c.cfg", "field.length = 4\nout = " + (dir / "cfg").string() + "\n");
    const std::string cmd = "LRCONE_OUT=" + (dir / "env").string() + " " + std::string(LRCONE_CLI_PATH) +
                            " field --config " + (dir / "c.cfg").string();
    ASSERT_EQ(std::system((cmd + " > /dev/null").c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "env" / "field.csv"));
    EXPECT_FALSE(fs::exists(dir / "cfg"));
    ASSERT_EQ(std::system((cmd + " --out " + (dir / "flag").string() + " > /dev/null").c_str()), 0);
    EXPECT_TRUE(fs::exists(dir / "flag" / "field.csv"));
}
