#include <doctest.h>

#include "spinsim/config.hpp"
#include "spinsim/output.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace spinsim;

TEST_CASE("config parsing") {
    const Config cfg = Config::parse_string(
        "experiment = canonical\n"
        "seed = 42\n"
        "# a comment\n"
        "[levels]\n"
        "values = 0 1 2   # inline comment\n"
        "beta = -1.5\n");

    CHECK(cfg.has("experiment"));
    CHECK(cfg.get_string("experiment") == "canonical");
    CHECK(cfg.get_long("seed") == 42);
    CHECK(cfg.get_u64("seed") == 42);
    CHECK(cfg.get_doubles("levels.values") == std::vector<double>{0.0, 1.0, 2.0});
    CHECK(cfg.get_longs("levels.values") == std::vector<long>{0, 1, 2});
    CHECK(cfg.get_double("levels.beta") == doctest::Approx(-1.5));
    CHECK_FALSE(cfg.has("missing"));

    SUBCASE("missing keys throw with the key name") {
        try {
            (void)cfg.get_string("nope");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("nope") != std::string::npos);
        }
    }
    SUBCASE("fallback getters") {
        CHECK(cfg.get_string_or("missing", "dflt") == "dflt");
        CHECK(cfg.get_double_or("missing", 2.5) == doctest::Approx(2.5));
        CHECK(cfg.get_long_or("seed", 7) == 42);
    }
    SUBCASE("type errors name the key") {
        try {
            (void)cfg.get_long("experiment");
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("experiment") != std::string::npos);
        }
    }
}

TEST_CASE("config strictness") {
    SUBCASE("duplicate keys are fatal") {
        CHECK_THROWS_AS(Config::parse_string("a = 1\na = 2\n"), ConfigError);
    }
    SUBCASE("malformed lines are fatal") {
        CHECK_THROWS_AS(Config::parse_string("just words\n"), ConfigError);
    }
    SUBCASE("unconsumed keys are reported by name") {
        const Config cfg = Config::parse_string("used = 1\nstray = 2\n");
        (void)cfg.get_long("used");
        try {
            cfg.check_consumed();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(std::string(e.what()).find("stray") != std::string::npos);
        }
        (void)cfg.get_long("stray");
        CHECK_NOTHROW(cfg.check_consumed());
    }
    SUBCASE("entries preserve file order") {
        const Config cfg = Config::parse_string("b = 1\n[s]\na = 2\n");
        REQUIRE(cfg.entries().size() == 2);
        CHECK(cfg.entries()[0].first == "b");
        CHECK(cfg.entries()[1].first == "s.a");
    }
}

TEST_CASE("config file io") {
    const std::filesystem::path tmp =
        std::filesystem::temp_directory_path() / "spinsim_cfg_test.ini";
    {
        std::ofstream out(tmp);
        out << "experiment = gqme\nseed = 5\n";
    }
    const Config cfg = Config::parse_file(tmp.string());
    CHECK(cfg.get_string("experiment") == "gqme");
    std::filesystem::remove(tmp);
    CHECK_THROWS_AS(Config::parse_file("/nonexistent/nowhere.ini"), ConfigError);
}

TEST_CASE("csv rendering") {
    Table t;
    t.name = "series";
    t.add_column("index", {0.0, 1.0, 2.0});
    t.add_column("p", {0.25, 0.5, 0.25}, /*is_probability=*/true);
    const std::string csv = render_csv(t);
    CHECK(csv.find("index,p\n") == 0);
    CHECK(csv.find("0.5") != std::string::npos);
    CHECK(csv.find("\r") == std::string::npos);
    // 17-significant-digit round trip.
    Table prec;
    prec.name = "p";
    prec.add_column("x", {1.0 / 3.0});
    const std::string rendered = render_csv(prec);
    double back = 0.0;
    std::sscanf(rendered.c_str() + rendered.find('\n') + 1, "%lf", &back);
    CHECK(back == 1.0 / 3.0);
}

TEST_CASE("probability columns re-validated at write time") {
    Table t;
    t.name = "bad";
    t.add_column("p", {0.5, 0.6}, /*is_probability=*/true);
    ResultRecord rec;
    rec.tables.push_back(t);
    const Config cfg = Config::parse_string("experiment = canonical\n");
    (void)cfg.get_string("experiment");
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "spinsim_badprob";
    std::filesystem::create_directories(dir);
    CHECK_THROWS(write_result(dir.string(), rec, cfg));
    std::filesystem::remove_all(dir);
}

TEST_CASE("atomic write and result layout") {
    const std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "spinsim_write_test";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);

    atomic_write((dir / "x.txt").string(), "payload");
    {
        std::ifstream in(dir / "x.txt");
        std::string got;
        std::getline(in, got);
        CHECK(got == "payload");
    }

    ResultRecord rec;
    rec.add_scalar("answer", 42.0);
    rec.add_scalar("noisy", 1.0, 0.1);
    rec.add_note("note", "text");
    Table t;
    t.name = "dist";
    t.add_column("p", {0.5, 0.5}, true);
    rec.tables.push_back(t);
    const Config cfg = Config::parse_string("experiment = canonical\n");
    (void)cfg.get_string("experiment");
    write_result(dir.string(), rec, cfg);

    CHECK(std::filesystem::exists(dir / "result.json"));
    CHECK(std::filesystem::exists(dir / "dist.csv"));
    CHECK(std::filesystem::exists(dir / "run_meta.json"));

    // Timestamps live only in run_meta.json; the payload is reproducible.
    std::ifstream in(dir / "result.json");
    std::string payload((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    CHECK(payload.find("time") == std::string::npos);
    CHECK(payload.find("answer") != std::string::npos);
    CHECK(payload.find("std_err") != std::string::npos);
    std::filesystem::remove_all(dir);
}
