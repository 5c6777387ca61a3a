#pragma once

#include "devmap/problem.hpp"
#include "devmap/variation.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace devmap {

// One `key = value` line of a config file.
struct ConfigEntry {
    std::string value;
    int line = 0;
};

// Sectioned key/value problem description. Line format: `[section]` headers
// (base, ambient, bundle, h, seed, submanifold, options), `key = value`
// entries, `#` comments. Values stay verbatim text until bound; expression
// grammar therefore embeds without escaping.
class ProblemConfig {
public:
    using Section = std::map<std::string, ConfigEntry>;

    static ProblemConfig parse(std::istream& in);
    static ProblemConfig parse(const std::string& text);

    bool has_section(const std::string& name) const;
    const Section* section(const std::string& name) const;         // nullptr when absent
    const Section& require_section(const std::string& name) const; // error names the section

    const ConfigEntry* entry(const std::string& section, const std::string& key) const;
    const ConfigEntry& require(const std::string& section, const std::string& key) const;

    // Typed reads. The fallback variants tolerate a missing key but still
    // reject malformed values.
    double number(const std::string& section, const std::string& key, double fallback) const;
    int integer(const std::string& section, const std::string& key, int fallback) const;
    std::uint64_t unsigned64(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const;
    std::vector<double> numbers(const std::string& section, const std::string& key) const;

private:
    std::map<std::string, Section> sections_;
};

// Binds a parsed config into a validated problem: [base] metric, [ambient]
// metric, optional [bundle] and [h] blocks, and exactly one of [seed] or
// [submanifold]. Unknown keys and mismatched dimensions are errors that name
// the offending key and line.
Problem build_problem(const ProblemConfig& config);

// Curve family described under [options]: family_1..family_n are expressions
// in x1 (curve parameter) and x2 (family parameter), family_range = t0 t1,
// and family_start (expression in x1 = family parameter) marks the seed
// parameter of submanifold-seeded problems.
CurveFamily read_curve_family(const ProblemConfig& config, int n);

} // namespace devmap
