#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace scms::vectors {

/// One line of the golden-vector file: `<kind> key=value key=value ...`.
struct record
{
    std::string kind;
    std::map<std::string, std::string> fields;
    int line = 0;

    const std::string& at(const std::string& key) const;
};

std::vector<record> parse(std::istream& in);

/// Recomputes the full vector set with this library, in the same line format
/// and order as the reference oracle script.
std::string generate();

struct mismatch
{
    int line;
    std::string kind;
    std::string expected;
    std::string actual;
};

/// Recomputes every record's `out`/`sig` field and reports differences.
std::vector<mismatch> check(const std::vector<record>& records);

} // namespace scms::vectors
