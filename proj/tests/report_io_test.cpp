#include "pagurus/report_io.hpp"

#include <gtest/gtest.h>

#include "pagurus/experiments.hpp"
#include "support/expect_errc.hpp"

namespace pagurus {
namespace {

MetricsReport sample_report() {
    auto s = fixture_scenario(12);
    s.workload.duration = 900.0;
    s.workload.loads = {{"img", ArrivalProcess::poisson(0.5)}, {"dd", ArrivalProcess::poisson(3.0)},
                        {"vid", ArrivalProcess::fixed_interval(60.0)}};
    return run(Policy::Pagurus, s);
}

TEST(ReportIo, RoundTripIsLossless) {
    const auto r = sample_report();
    ASSERT_GT(r.queries.size(), 100u);
    const auto back = read_report(write_report(r));
    EXPECT_TRUE(back == r);
    EXPECT_EQ(write_report(back, 2), write_report(r, 2));
}

TEST(ReportIo, RecordsHaveOneLinePerNonzeroPath) {
    const auto r = sample_report();
    const auto text = format_records(r);
    EXPECT_EQ(text.rfind("action,path,count,p50,p95,p99,r_real\n", 0), 0u);
    std::size_t lines = 0, expected = 1;
    for (char c : text) lines += c == '\n';
    for (const auto& a : r.actions)
        for (auto n : a.paths) expected += n > 0;
    EXPECT_EQ(lines, expected);
    EXPECT_NE(text.find("\ndd,"), std::string::npos);
}

TEST(ReportIo, TableMentionsEveryActiveAction) {
    const auto t = format_table(sample_report());
    for (const char* name : {"img", "dd", "vid"}) EXPECT_NE(t.find(name), std::string::npos);
    EXPECT_EQ(t.find("kms"), std::string::npos);
    EXPECT_NE(t.find("violations=0"), std::string::npos);
}

TEST(ReportIo, MalformedDocuments) {
    EXPECT_ERRC(read_report("{not json"), Errc::ConfigError);
    EXPECT_ERRC(read_report("{\"policy\": \"x\"}"), Errc::ConfigError);
    auto j = to_json(sample_report());
    j["queries"][0][7] = "teleport";
    EXPECT_ERRC(report_from_json(j), Errc::ConfigError);
}

}  // namespace
}  // namespace pagurus
