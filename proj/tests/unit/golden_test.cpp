#include <scms/vectors.hpp>

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

namespace {

std::string read_golden()
{
    std::ifstream in(SCMS_GOLDEN_FILE);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

TEST(GoldenVectors, EveryRecordMatchesOracle)
{
    std::istringstream in(read_golden());
    const auto records = scms::vectors::parse(in);
    ASSERT_GT(records.size(), 30u);
    for (const auto& m : scms::vectors::check(records)) {
        ADD_FAILURE() << "line " << m.line << " (" << m.kind << "): expected " << m.expected << " got " << m.actual;
    }
}

TEST(GoldenVectors, AllKindsCovered)
{
    std::istringstream in(read_golden());
    std::set<std::string> kinds;
    for (const auto& r : scms::vectors::parse(in)) {
        kinds.insert(r.kind);
    }
    const std::set<std::string> expected{"aes_block",   "prf_block",     "hash_truncated", "expand_f",
                                         "evolve_seed", "evolve_seed_steps", "pre_linkage", "linkage_value",
                                         "cocoon",      "public_key",    "ecdsa_rfc6979"};
    EXPECT_EQ(kinds, expected);
}

TEST(GoldenVectors, GeneratorReproducesFile)
{
    EXPECT_EQ(scms::vectors::generate(), read_golden());
}

TEST(GoldenVectors, CheckReportsTamperedRecord)
{
    std::istringstream in(read_golden());
    auto records = scms::vectors::parse(in);
    auto& out = records.front().fields["out"];
    out[0] = out[0] == '0' ? '1' : '0';
    EXPECT_EQ(scms::vectors::check(records).size(), 1u);
}

TEST(GoldenVectors, MalformedLineRejected)
{
    std::istringstream in("prf_block key=00 garbage\n");
    EXPECT_THROW(scms::vectors::parse(in), std::invalid_argument);
}

} // namespace
