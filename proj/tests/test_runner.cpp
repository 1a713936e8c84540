#include "doctest.h"

#include "qbell/errors.hpp"
#include "qbell/runner.hpp"

using namespace qbell;

TEST_CASE("sha256 known answer") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("config echo round trips and drops the thread count") {
    ExperimentConfig c;
    c.command = "tolerant";
    c.backend = "bell";
    c.d = 3;
    c.eps1 = 0.001;
    c.eps2 = 0.3;
    c.seed = 99;
    c.threads = 4;
    const nlohmann::json e = c.echo();
    CHECK_FALSE(e.contains("threads"));
    CHECK(e.at("source") == "near");
    const ExperimentConfig back = ExperimentConfig::from_json(e);
    CHECK(back.echo() == e);
}

TEST_CASE("config parsing rejects wrong types and a missing command") {
    auto code = [](const nlohmann::json& j) {
        try {
            ExperimentConfig::from_json(j);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Internal;
    };
    CHECK(code({{"command", "learn"}, {"d", "3"}}) == ErrorCode::Parse);
    CHECK(code({{"d", 3}}) == ErrorCode::Parse);
}

TEST_CASE("reports do not depend on the thread count") {
    ExperimentConfig c;
    c.command = "learn";
    c.d = 3;
    c.n = 1;
    c.trials = 6;
    c.seed = 4;
    c.threads = 1;
    const std::string one = report_text(run_experiment(c));
    c.threads = 3;
    CHECK(report_text(run_experiment(c)) == one);
    c.seed = 5;
    CHECK(report_text(run_experiment(c)) != one);
}

TEST_CASE("selftest passes") {
    const nlohmann::json checks = run_selftest();
    REQUIRE(checks.is_array());
    for (const auto& c : checks) {
        INFO(c.dump());
        CHECK(c.at("pass").get<bool>());
    }
}
