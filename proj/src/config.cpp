#include "devmap/config.hpp"

#include "devmap/io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <istream>
#include <sstream>
#include <utility>

namespace devmap {

namespace {

const char* kSections[] = {"base", "ambient", "bundle", "h", "seed", "submanifold", "options"};

std::string trim(const std::string& s)
{
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string where(const std::string& key, const std::string& section, int line)
{
    return "key '" + key + "' in [" + section + "] (line " + std::to_string(line) + ")";
}

std::vector<double> parse_numbers(const std::string& text, const std::string& context)
{
    std::vector<double> out;
    const char* p = text.c_str();
    while (*p) {
        while (std::isspace(static_cast<unsigned char>(*p)) || *p == ',') ++p;
        if (!*p) break;
        char* end = nullptr;
        const double v = std::strtod(p, &end);
        if (end == p)
            throw ValidationError(context + ": expected numbers, got '" + text + "'");
        out.push_back(v);
        p = end;
    }
    return out;
}

// Splits key into a leading name and 1-based integer indices: "g_1_2" with
// name "g" and arity 2 yields {1, 2}. Returns false when the key is shaped
// differently (wrong name, wrong arity, non-numeric part).
bool indexed_key(const std::string& key, const std::string& name, std::size_t arity,
                 std::vector<int>& idx)
{
    if (key.size() <= name.size() || key.compare(0, name.size(), name) != 0
        || key[name.size()] != '_')
        return false;
    idx.clear();
    std::size_t pos = name.size() + 1;
    while (pos <= key.size()) {
        const std::size_t next = std::min(key.find('_', pos), key.size());
        if (next == pos) return false;
        int value = 0;
        for (std::size_t i = pos; i < next; ++i) {
            if (!std::isdigit(static_cast<unsigned char>(key[i]))) return false;
            value = value * 10 + (key[i] - '0');
        }
        idx.push_back(value);
        pos = next + 1;
    }
    return idx.size() == arity;
}

int packed_upper(int a, int b, int dim) // 0-based, a <= b after swap
{
    if (a > b) std::swap(a, b);
    return a * dim - a * (a - 1) / 2 + (b - a);
}

ScalarField bind_expression(const std::string& text, int dim, const std::string& context)
{
    try {
        return parse_scalar_field(text, dim);
    } catch (const ParseError& e) {
        throw ValidationError(context + ": " + e.what());
    }
}

// Grid of expression texts remembering the source line of each slot so that
// collisions between mirrored keys can name the earlier entry.
struct TextTable {
    std::vector<std::string> texts;
    std::vector<int> set_at; // line of the explicit entry, 0 = default

    TextTable(std::size_t size, std::vector<std::string> defaults)
        : texts(std::move(defaults)), set_at(size, 0) {}

    void set(std::size_t slot, const std::string& text, int line, const std::string& context)
    {
        if (set_at[slot])
            throw ValidationError(context + " collides with the entry at line "
                                  + std::to_string(set_at[slot]));
        texts[slot] = text;
        set_at[slot] = line;
    }
};

std::vector<std::string> identity_defaults(int dim)
{
    std::vector<std::string> d;
    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) d.push_back(a == b ? "1" : "0");
    return d;
}

void check_index(int value, int limit, const std::string& what, const std::string& context)
{
    if (value < 1 || value > limit)
        throw ValidationError(context + ": " + what + " index " + std::to_string(value)
                              + " is out of range 1.." + std::to_string(limit));
}

Box read_domain(const ProblemConfig& cfg, const std::string& section, int dim)
{
    const bool has_lo = cfg.entry(section, "domain_lo") != nullptr;
    const bool has_hi = cfg.entry(section, "domain_hi") != nullptr;
    if (has_lo != has_hi)
        throw ValidationError("[" + section + "] needs both domain_lo and domain_hi or neither");
    Box box;
    if (!has_lo) return box;
    const std::vector<double> lo = cfg.numbers(section, "domain_lo");
    const std::vector<double> hi = cfg.numbers(section, "domain_hi");
    if (static_cast<int>(lo.size()) != dim || static_cast<int>(hi.size()) != dim)
        throw ValidationError("[" + section + "] domain bounds need " + std::to_string(dim)
                              + " numbers per side");
    box.lo = Eigen::Map<const Eigen::VectorXd>(lo.data(), dim);
    box.hi = Eigen::Map<const Eigen::VectorXd>(hi.data(), dim);
    for (int i = 0; i < dim; ++i)
        if (!(box.lo[i] <= box.hi[i]))
            throw ValidationError("[" + section + "] domain bounds must be ordered: lo <= hi");
    return box;
}

MetricField read_metric(const ProblemConfig& cfg, const std::string& section,
                        const std::string& dim_key, int dim)
{
    TextTable table(static_cast<std::size_t>(dim * (dim + 1) / 2), identity_defaults(dim));
    std::vector<int> idx;
    for (const auto& [key, entry] : cfg.require_section(section)) {
        if (key == dim_key || key == "domain_lo" || key == "domain_hi") continue;
        const std::string context = where(key, section, entry.line);
        if (!indexed_key(key, "g", 2, idx))
            throw ValidationError("unrecognized " + context);
        check_index(idx[0], dim, "coordinate", context);
        check_index(idx[1], dim, "coordinate", context);
        table.set(static_cast<std::size_t>(packed_upper(idx[0] - 1, idx[1] - 1, dim)),
                  entry.value, entry.line, context);
    }

    std::vector<ScalarField> fields;
    fields.reserve(table.texts.size());
    for (std::size_t i = 0; i < table.texts.size(); ++i)
        fields.push_back(bind_expression(table.texts[i], dim,
                                         "metric component in [" + section + "]"));
    return MetricField(dim, std::move(fields), read_domain(cfg, section, dim));
}

BundleSpec read_bundle(const ProblemConfig& cfg, int n, const Box& sample_box)
{
    if (!cfg.has_section("bundle")) return BundleSpec::trivial(n, 0);
    const int s = cfg.integer("bundle", "s", -1);
    if (s < 0) throw ValidationError("missing key 's' in [bundle]");
    if (s == 0) return BundleSpec::trivial(n, 0);

    TextTable frak(static_cast<std::size_t>(s * (s + 1) / 2), identity_defaults(s));
    TextTable omega(static_cast<std::size_t>(n * s * s),
                    std::vector<std::string>(static_cast<std::size_t>(n * s * s), "0"));
    std::vector<int> idx;
    for (const auto& [key, entry] : cfg.require_section("bundle")) {
        if (key == "s") continue;
        const std::string context = where(key, "bundle", entry.line);
        if (indexed_key(key, "frak", 2, idx)) {
            check_index(idx[0], s, "fiber", context);
            check_index(idx[1], s, "fiber", context);
            frak.set(static_cast<std::size_t>(packed_upper(idx[0] - 1, idx[1] - 1, s)),
                     entry.value, entry.line, context);
        } else if (indexed_key(key, "omega", 3, idx)) {
            // omega_a_alpha_beta is the coefficient of xi_beta in D_{e_a} xi_alpha,
            // i.e. entry (beta, alpha) of W_a
            check_index(idx[0], n, "coordinate", context);
            check_index(idx[1], s, "fiber", context);
            check_index(idx[2], s, "fiber", context);
            omega.set(static_cast<std::size_t>(((idx[0] - 1) * s + (idx[2] - 1)) * s
                                               + (idx[1] - 1)),
                      entry.value, entry.line, context);
        } else {
            throw ValidationError("unrecognized " + context);
        }
    }

    std::vector<ScalarField> frak_fields;
    for (const auto& text : frak.texts)
        frak_fields.push_back(bind_expression(text, n, "fiber metric component in [bundle]"));
    std::vector<std::vector<ScalarField>> omega_fields(static_cast<std::size_t>(n));
    for (int a = 0; a < n; ++a)
        for (int e = 0; e < s * s; ++e)
            omega_fields[static_cast<std::size_t>(a)].push_back(
                bind_expression(omega.texts[static_cast<std::size_t>(a * s * s + e)], n,
                                "connection component in [bundle]"));
    return BundleSpec(n, s, std::move(frak_fields), std::move(omega_fields), sample_box);
}

SecondFundamentalField read_h(const ProblemConfig& cfg, int n, int s)
{
    if (!cfg.has_section("h")) return SecondFundamentalField::zero(n, s);
    const std::size_t per = static_cast<std::size_t>(n * (n + 1) / 2);
    TextTable table(per * static_cast<std::size_t>(std::max(s, 1)),
                    std::vector<std::string>(per * static_cast<std::size_t>(std::max(s, 1)), "0"));
    std::vector<int> idx;
    for (const auto& [key, entry] : cfg.require_section("h")) {
        const std::string context = where(key, "h", entry.line);
        if (!indexed_key(key, "h", 3, idx)) throw ValidationError("unrecognized " + context);
        check_index(idx[0], s, "fiber", context);
        check_index(idx[1], n, "coordinate", context);
        check_index(idx[2], n, "coordinate", context);
        table.set(static_cast<std::size_t>(idx[0] - 1) * per
                      + static_cast<std::size_t>(packed_upper(idx[1] - 1, idx[2] - 1, n)),
                  entry.value, entry.line, context);
    }

    std::vector<std::vector<ScalarField>> comps(static_cast<std::size_t>(s));
    for (int alpha = 0; alpha < s; ++alpha)
        for (std::size_t i = 0; i < per; ++i)
            comps[static_cast<std::size_t>(alpha)].push_back(
                bind_expression(table.texts[static_cast<std::size_t>(alpha) * per + i], n,
                                "form component in [h]"));
    return SecondFundamentalField(n, s, std::move(comps));
}

PointSeed read_point_seed(const ProblemConfig& cfg, int n, int s, int ambient_dim)
{
    for (const auto& [key, entry] : cfg.require_section("seed"))
        if (key != "p" && key != "ptilde" && key != "phi")
            throw ValidationError("unrecognized " + where(key, "seed", entry.line));

    PointSeed seed;
    const std::vector<double> p = cfg.numbers("seed", "p");
    if (static_cast<int>(p.size()) != n)
        throw ValidationError("key 'p' in [seed] needs " + std::to_string(n) + " numbers, got "
                              + std::to_string(p.size()));
    const std::vector<double> pt = cfg.numbers("seed", "ptilde");
    if (static_cast<int>(pt.size()) != ambient_dim)
        throw ValidationError("key 'ptilde' in [seed] needs " + std::to_string(ambient_dim)
                              + " numbers, got " + std::to_string(pt.size()));
    const std::vector<double> phi = cfg.numbers("seed", "phi");
    const int expected = ambient_dim * (n + s);
    if (static_cast<int>(phi.size()) != expected)
        throw ValidationError("key 'phi' in [seed] needs " + std::to_string(ambient_dim) + " x "
                              + std::to_string(n + s) + " = " + std::to_string(expected)
                              + " numbers row-major, got " + std::to_string(phi.size()));

    seed.p = Eigen::Map<const Eigen::VectorXd>(p.data(), n);
    seed.p_tilde = Eigen::Map<const Eigen::VectorXd>(pt.data(), ambient_dim);
    seed.phi = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                              Eigen::RowMajor>>(phi.data(), ambient_dim, n + s);
    return seed;
}

SubmanifoldSeed read_submanifold_seed(const ProblemConfig& cfg, int n, int s, int ambient_dim)
{
    std::vector<int> idx;
    for (const auto& [key, entry] : cfg.require_section("submanifold")) {
        if (key == "udomain") continue;
        const std::string context = where(key, "submanifold", entry.line);
        if (indexed_key(key, "S", 1, idx)) {
            check_index(idx[0], n, "coordinate", context);
        } else if (indexed_key(key, "Stilde", 1, idx)) {
            check_index(idx[0], ambient_dim, "coordinate", context);
        } else if (indexed_key(key, "psi", 2, idx)) {
            check_index(idx[0], ambient_dim, "row", context);
            check_index(idx[1], n + s, "column", context);
        } else if (indexed_key(key, "sigma", 1, idx)) {
            check_index(idx[0], n - 1, "normal", context);
        } else {
            throw ValidationError("unrecognized " + context);
        }
    }

    const std::vector<double> udomain = cfg.numbers("submanifold", "udomain");
    if (udomain.size() != 2 || !(udomain[0] < udomain[1]))
        throw ValidationError("key 'udomain' in [submanifold] needs two ordered numbers");

    const auto field_at = [&](const std::string& key) {
        return bind_expression(cfg.require("submanifold", key).value, 1,
                               "key '" + key + "' in [submanifold]");
    };

    SubmanifoldSeed seed;
    std::vector<ScalarField> s_comps, st_comps;
    for (int a = 1; a <= n; ++a) s_comps.push_back(field_at("S_" + std::to_string(a)));
    for (int A = 1; A <= ambient_dim; ++A)
        st_comps.push_back(field_at("Stilde_" + std::to_string(A)));
    seed.embedding = Curve::from_expressions(std::move(s_comps), udomain[0], udomain[1]);
    seed.ambient_embedding =
        Curve::from_expressions(std::move(st_comps), udomain[0], udomain[1]);

    for (int A = 1; A <= ambient_dim; ++A)
        for (int j = 1; j <= n + s; ++j)
            seed.psi.push_back(field_at("psi_" + std::to_string(A) + "_" + std::to_string(j)));

    bool any_sigma = false;
    for (int mu = 1; mu < n; ++mu)
        if (cfg.entry("submanifold", "sigma_" + std::to_string(mu))) any_sigma = true;
    if (any_sigma)
        for (int mu = 1; mu < n; ++mu)
            seed.sigma.push_back(field_at("sigma_" + std::to_string(mu)));
    return seed;
}

void check_options_keys(const ProblemConfig& cfg, int n)
{
    if (!cfg.has_section("options")) return;
    const char* known[] = {"step",        "tol",          "jobs",        "seed",
                           "u",           "vec",          "grid_lo",     "grid_hi",
                           "audit_target", "audit_count",  "family_range", "family_domain",
                           "family_start"};
    std::vector<int> idx;
    for (const auto& [key, entry] : cfg.require_section("options")) {
        if (std::find(std::begin(known), std::end(known), key) != std::end(known)) continue;
        const std::string context = where(key, "options", entry.line);
        if (indexed_key(key, "family", 1, idx)) {
            check_index(idx[0], n, "coordinate", context);
            continue;
        }
        throw ValidationError("unrecognized " + context);
    }
}

// Splices a numeric value for the family parameter x2 into an expression.
std::string bind_family_parameter(const std::string& text, double u)
{
    const std::string value = "(" + format_double(u) + ")";
    std::string out;
    for (std::size_t i = 0; i < text.size();) {
        const bool boundary_before =
            i == 0 || (!std::isalnum(static_cast<unsigned char>(text[i - 1])) && text[i - 1] != '_');
        if (boundary_before && text.compare(i, 2, "x2") == 0
            && (i + 2 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[i + 2])))) {
            out += value;
            i += 2;
        } else {
            out += text[i++];
        }
    }
    return out;
}

} // namespace

ProblemConfig ProblemConfig::parse(std::istream& in)
{
    ProblemConfig cfg;
    std::string line, current;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (const std::size_t hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']' || line.size() < 3)
                throw ValidationError("malformed section header at line "
                                      + std::to_string(number));
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (std::find_if(std::begin(kSections), std::end(kSections),
                             [&](const char* s) { return name == s; })
                == std::end(kSections))
                throw ValidationError("unknown section [" + name + "] at line "
                                      + std::to_string(number));
            if (cfg.sections_.count(name))
                throw ValidationError("duplicate section [" + name + "] at line "
                                      + std::to_string(number));
            cfg.sections_[name] = {};
            current = name;
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ValidationError("expected 'key = value' at line " + std::to_string(number));
        if (current.empty())
            throw ValidationError("entry before any [section] header at line "
                                  + std::to_string(number));
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ValidationError("empty key or value at line " + std::to_string(number));

        auto& section = cfg.sections_[current];
        if (const auto it = section.find(key); it != section.end())
            throw ValidationError("duplicate key '" + key + "' in [" + current + "] at line "
                                  + std::to_string(number) + "; first set at line "
                                  + std::to_string(it->second.line));
        section[key] = ConfigEntry{value, number};
    }
    return cfg;
}

ProblemConfig ProblemConfig::parse(const std::string& text)
{
    std::istringstream in(text);
    return parse(in);
}

bool ProblemConfig::has_section(const std::string& name) const
{
    return sections_.count(name) != 0;
}

const ProblemConfig::Section* ProblemConfig::section(const std::string& name) const
{
    const auto it = sections_.find(name);
    return it == sections_.end() ? nullptr : &it->second;
}

const ProblemConfig::Section& ProblemConfig::require_section(const std::string& name) const
{
    const Section* s = section(name);
    if (!s) throw ValidationError("missing section [" + name + "]");
    return *s;
}

const ConfigEntry* ProblemConfig::entry(const std::string& section, const std::string& key) const
{
    const Section* s = this->section(section);
    if (!s) return nullptr;
    const auto it = s->find(key);
    return it == s->end() ? nullptr : &it->second;
}

const ConfigEntry& ProblemConfig::require(const std::string& section,
                                          const std::string& key) const
{
    const ConfigEntry* e = entry(section, key);
    if (!e) throw ValidationError("missing key '" + key + "' in [" + section + "]");
    return *e;
}

double ProblemConfig::number(const std::string& section, const std::string& key,
                             double fallback) const
{
    const ConfigEntry* e = entry(section, key);
    if (!e) return fallback;
    const std::vector<double> v = parse_numbers(e->value, where(key, section, e->line));
    if (v.size() != 1)
        throw ValidationError(where(key, section, e->line) + ": expected one number");
    return v[0];
}

int ProblemConfig::integer(const std::string& section, const std::string& key,
                           int fallback) const
{
    const ConfigEntry* e = entry(section, key);
    if (!e) return fallback;
    const double v = number(section, key, 0.0);
    const int i = static_cast<int>(v);
    if (static_cast<double>(i) != v)
        throw ValidationError(where(key, section, e->line) + ": expected an integer");
    return i;
}

std::uint64_t ProblemConfig::unsigned64(const std::string& section, const std::string& key,
                                        std::uint64_t fallback) const
{
    const ConfigEntry* e = entry(section, key);
    if (!e) return fallback;
    const std::string text = trim(e->value);
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(text.c_str(), &end, 10);
    if (end != text.c_str() + text.size() || text.empty() || text[0] == '-')
        throw ValidationError(where(key, section, e->line)
                              + ": expected an unsigned integer");
    return v;
}

std::vector<double> ProblemConfig::numbers(const std::string& section,
                                           const std::string& key) const
{
    const ConfigEntry& e = require(section, key);
    return parse_numbers(e.value, where(key, section, e.line));
}

Problem build_problem(const ProblemConfig& config)
{
    const int n = config.integer("base", "n", -1);
    if (n < 1) {
        config.require_section("base");
        throw ValidationError("key 'n' in [base] must be a positive dimension");
    }
    MetricField base = read_metric(config, "base", "n", n);

    const int ambient_dim = config.integer("ambient", "dim", -1);
    if (ambient_dim < 1) {
        config.require_section("ambient");
        throw ValidationError("key 'dim' in [ambient] must be a positive dimension");
    }
    MetricField ambient = read_metric(config, "ambient", "dim", ambient_dim);

    BundleSpec bundle = read_bundle(config, n, base.domain());
    const int s = bundle.rank();
    SecondFundamentalField h = read_h(config, n, s);
    check_options_keys(config, n);

    const bool point = config.has_section("seed");
    const bool sub = config.has_section("submanifold");
    if (point == sub)
        throw ValidationError("exactly one of [seed] or [submanifold] must be present");

    if (point)
        return Problem(std::move(base), std::move(bundle), std::move(h), std::move(ambient),
                       read_point_seed(config, n, s, ambient_dim));
    return Problem(std::move(base), std::move(bundle), std::move(h), std::move(ambient),
                   read_submanifold_seed(config, n, s, ambient_dim));
}

CurveFamily read_curve_family(const ProblemConfig& config, int n)
{
    std::vector<std::string> texts;
    for (int a = 1; a <= n; ++a) {
        const ConfigEntry& e = config.require("options", "family_" + std::to_string(a));
        bind_expression(e.value, 2, where("family_" + std::to_string(a), "options", e.line));
        texts.push_back(e.value);
    }
    std::vector<double> range{0.0, 1.0};
    if (config.entry("options", "family_range")) {
        range = config.numbers("options", "family_range");
        if (range.size() != 2 || !(range[0] < range[1]))
            throw ValidationError(
                "key 'family_range' in [options] needs two ordered numbers");
    }

    CurveFamily family;
    if (config.entry("options", "family_domain")) {
        const std::vector<double> dom = config.numbers("options", "family_domain");
        if (dom.size() != 2 || !(dom[0] < dom[1]))
            throw ValidationError(
                "key 'family_domain' in [options] needs two ordered numbers");
        family.u0 = dom[0];
        family.u1 = dom[1];
    }
    family.curve = [texts, range](double u) {
        std::vector<ScalarField> comps;
        comps.reserve(texts.size());
        for (const auto& text : texts)
            comps.push_back(parse_scalar_field(bind_family_parameter(text, u), 1));
        return Curve::from_expressions(std::move(comps), range[0], range[1]);
    };
    if (const ConfigEntry* e = config.entry("options", "family_start")) {
        const ScalarField start =
            bind_expression(e->value, 1, where("family_start", "options", e->line));
        family.start = [start](double u) { return start.eval(std::vector<double>{u}); };
    }
    return family;
}

} // namespace devmap
