#include <gtest/gtest.h>

#include <sstream>

#include "cli.hpp"
#include "spreadchan/error.hpp"

using namespace spreadchan;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

}  // namespace

TEST(Cli, RangeParsing) {
    EXPECT_EQ(cli::parse_range("0.5"), std::vector<double>{0.5});
    const auto r = cli::parse_range("0:0.1:0.3");
    ASSERT_EQ(r.size(), 4u);
    EXPECT_DOUBLE_EQ(r.back(), 0.30000000000000004);
    EXPECT_EQ(cli::parse_range("0:0.25:1").size(), 5u);
    EXPECT_THROW(cli::parse_range("0:0:1"), Error);
    EXPECT_THROW(cli::parse_range("1:0.1:0"), Error);
    EXPECT_THROW(cli::parse_range("0:x:1"), Error);
}

TEST(Cli, FidelityTableUsesClosedForm) {
    const auto r = run({"fidelity", "--state", "vac", "--alpha", "0:0.5:0.5"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("# command: fidelity"), std::string::npos);
    // exp(-0.25)
    EXPECT_NE(r.out.find("0.5,vac,0.778800783071"), std::string::npos) << r.out;
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(run({"fidelity", "--state", "nonsense"}).code, cli::exit_parse);
    EXPECT_EQ(run({"mc", "simulate", "--state", "vac", "--alpha", "0.1", "--reps", "10", "--strict"}).code,
              cli::exit_parse);
    EXPECT_EQ(run({"fidelity", "--state", "fock:n=3", "--alpha", "1", "--dim", "4"}).code, cli::exit_numeric);
    EXPECT_EQ(run({"mc", "simulate", "--state", "fock:n=1", "--alpha", "0.9", "--reps", "2000", "--seed", "1",
                   "--strict"})
                  .code,
              cli::exit_ambiguous);
    EXPECT_EQ(run({"--help"}).code, cli::exit_ok);
}

TEST(Cli, RepeatedRunsAreIdentical) {
    const std::vector<std::string> args{"mc", "simulate", "--state", "sq:nbar=5", "--alpha", "0.1:0.1:0.3",
                                        "--reps", "500", "--seed", "3"};
    const auto a = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, run(args).out);
}
