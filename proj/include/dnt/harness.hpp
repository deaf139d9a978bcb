#pragma once

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dnt/classical_tests.hpp"
#include "dnt/engine.hpp"
#include "dnt/errors.hpp"
#include "dnt/image_similarity.hpp"
#include "dnt/stats/distributions.hpp"
#include "dnt/stats/random.hpp"

namespace dnt {

enum class Method { DntRaw, DntImage, KS, AD, JB, GLB, GG, BS, PSNR, SSIM };

inline constexpr std::array<Method, 10> kAllMethods{Method::DntRaw, Method::DntImage, Method::KS, Method::AD,
                                                   Method::JB,     Method::GLB,      Method::GG, Method::BS,
                                                   Method::PSNR,   Method::SSIM};

inline constexpr std::string_view to_string(Method m)
{
    switch (m) {
    case Method::DntRaw: return "DNT-raw";
    case Method::DntImage: return "DNT-image";
    case Method::KS: return "KS";
    case Method::AD: return "AD";
    case Method::JB: return "JB";
    case Method::GLB: return "GLB";
    case Method::GG: return "GG";
    case Method::BS: return "BS";
    case Method::PSNR: return "PSNR";
    case Method::SSIM: return "SSIM";
    }
    return "?";
}

inline std::string valid_method_list()
{
    std::string s;
    for (auto m : kAllMethods) {
        if (!s.empty()) s += ", ";
        s += to_string(m);
    }
    return s;
}

inline Method parse_method(std::string_view s)
{
    auto lower = [](std::string_view v) {
        std::string out(v);
        std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        return out;
    };
    const auto key = lower(s);
    for (auto m : kAllMethods) {
        if (lower(to_string(m)) == key) return m;
    }
    throw ConfigError("unknown method '" + std::string(s) + "'; valid methods: " + valid_method_list());
}

inline std::optional<ClassicalTest> classical_of(Method m)
{
    switch (m) {
    case Method::KS: return ClassicalTest::KS;
    case Method::AD: return ClassicalTest::AD;
    case Method::JB: return ClassicalTest::JB;
    case Method::GLB: return ClassicalTest::GLB;
    case Method::GG: return ClassicalTest::GG;
    case Method::BS: return ClassicalTest::BS;
    default: return std::nullopt;
    }
}

struct RunConfig {
    std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
    std::size_t reps = 1'000;
    std::size_t n = 100;
    std::size_t calibration_reps = 20'000;
    double alpha = 0.05;
    std::uint64_t master_seed = 20210601;
    std::vector<int> cases{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15};
    TrainConfig train;
    std::string output_csv;
    std::string output_markdown;

    void validate() const
    {
        if (methods.empty()) throw ConfigError("methods must not be empty");
        if (reps < 50) throw ConfigError("reps must be at least 50");
        if (calibration_reps < 100) throw ConfigError("calibration_reps must be at least 100");
        if (n < 8) throw ConfigError("n must be at least 8");
        if (!(alpha > 0 && alpha < 1)) throw ConfigError("alpha must lie in (0,1)");
        if (cases.empty()) throw ConfigError("cases must not be empty");
        for (int c : cases) {
            if (c < 1 || c > stats::kNumCases) throw ConfigError("case ids must be in 1..15");
        }
    }

    /// TrainConfig with the run-level n, alpha and seed applied.
    TrainConfig train_config(ExtractorId ex) const
    {
        TrainConfig t = train;
        t.n = n;
        t.alpha = alpha;
        t.master_seed = master_seed;
        t.extractor = ex;
        return t;
    }
};

struct PowerRow {
    int case_id = 0;
    std::string label;
    std::vector<double> fractions; ///< one per method, rejections / reps
};

struct PowerTable {
    std::vector<std::string> methods;
    std::vector<PowerRow> rows;
    std::vector<double> mean_row; ///< per-method mean over the H1 rows (cases 1..14)
    std::size_t reps = 0;
    std::size_t n = 0;
    std::uint64_t master_seed = 0;

    const PowerRow& row(int case_id) const
    {
        for (const auto& r : rows) {
            if (r.case_id == case_id) return r;
        }
        throw DomainError("power table has no row for case " + std::to_string(case_id));
    }

    double power(int case_id, std::string_view method) const
    {
        const auto it = std::find(methods.begin(), methods.end(), method);
        if (it == methods.end()) throw DomainError("power table has no method " + std::string(method));
        return row(case_id).fractions[static_cast<std::size_t>(it - methods.begin())];
    }

    double mean(std::string_view method) const
    {
        const auto it = std::find(methods.begin(), methods.end(), method);
        if (it == methods.end()) throw DomainError("power table has no method " + std::string(method));
        return mean_row[static_cast<std::size_t>(it - methods.begin())];
    }
};

/// A calibrated decision rule evaluated on raw samples.
struct Evaluator {
    Method method;
    StatisticFn statistic;
    double cutoff = 0;
    Direction direction = Direction::RejectLarge;
    std::shared_ptr<const DNTModel> model;

    bool rejects(std::span<const double> x) const { return dnt::rejects(statistic(x), cutoff, direction); }
};

using ProgressFn = std::function<void(std::string_view)>;

/// Purpose tag of the paired test samples.
inline constexpr std::string_view kTestPurpose = "test";

/// Seed handed to calibrate_cutoff for a method; disjoint from test and training streams.
inline std::uint64_t calibration_seed(std::uint64_t master, Method m)
{
    return stats::SeedScheme(master).stream(0, static_cast<std::uint64_t>(m), "calibration-seed");
}

/// Trains (DNT) or calibrates (everything else) one method for a run.
inline Evaluator make_evaluator(Method m, const RunConfig& cfg)
{
    Evaluator ev{m, {}, 0.0, Direction::RejectLarge, nullptr};
    if (m == Method::DntRaw || m == Method::DntImage) {
        auto model = std::make_shared<const DNTModel>(
            train(cfg.train_config(m == Method::DntRaw ? ExtractorId::RawOrder : ExtractorId::ImageGrid)));
        ev.cutoff = model->cutoff;
        ev.statistic = [model](std::span<const double> x) { return dnt_statistic(x, *model); };
        ev.model = std::move(model);
        return ev;
    }
    if (auto t = classical_of(m)) {
        const ClassicalTest test = *t;
        ev.direction = direction_of(test);
        ev.statistic = [test](std::span<const double> x) { return compute(test, x).value; };
    } else {
        const auto metric = m == Method::PSNR ? SimilarityMetric::PSNR : SimilarityMetric::SSIM;
        auto sim = std::make_shared<const SimilarityStatistic>(metric, cfg.n);
        ev.statistic = [sim](std::span<const double> x) { return (*sim)(x); };
    }
    ev.cutoff = calibrate_cutoff(ev.statistic, cfg.n, cfg.calibration_reps, cfg.alpha,
                                 calibration_seed(cfg.master_seed, m), ev.direction);
    return ev;
}

/// Paired power study: every method sees the identical test sample for each
/// (case, replicate), drawn from stream(case, replicate, "test").
inline PowerTable run_power_study(const RunConfig& cfg, const ProgressFn& progress = {})
{
    cfg.validate();
    std::vector<Evaluator> evaluators;
    evaluators.reserve(cfg.methods.size());
    for (Method m : cfg.methods) {
        if (progress) progress("preparing " + std::string(to_string(m)));
        try {
            evaluators.push_back(make_evaluator(m, cfg));
        } catch (const Error& e) {
            throw Error("method " + std::string(to_string(m)) + " failed during calibration: " + e.what());
        }
    }

    PowerTable table;
    table.reps = cfg.reps;
    table.n = cfg.n;
    table.master_seed = cfg.master_seed;
    for (Method m : cfg.methods) table.methods.emplace_back(to_string(m));

    const stats::SeedScheme seeds(cfg.master_seed);
    for (int case_id : cfg.cases) {
        const auto spec = stats::case_spec(case_id);
        if (progress) progress("case " + std::to_string(case_id) + " " + stats::label(spec));
        std::vector<std::size_t> hits(evaluators.size(), 0);
        for (std::size_t r = 0; r < cfg.reps; ++r) {
            const auto x = stats::sample(spec, cfg.n, seeds.stream(static_cast<std::uint64_t>(case_id), r, kTestPurpose));
            for (std::size_t k = 0; k < evaluators.size(); ++k) {
                try {
                    if (evaluators[k].rejects(x.values)) ++hits[k];
                } catch (const Error& e) {
                    throw Error("method " + table.methods[k] + " failed on case " + std::to_string(case_id) +
                                ", replicate " + std::to_string(r) + ": " + e.what());
                }
            }
        }
        PowerRow row{case_id, stats::label(spec), {}};
        for (auto h : hits) row.fractions.push_back(static_cast<double>(h) / static_cast<double>(cfg.reps));
        table.rows.push_back(std::move(row));
    }

    table.mean_row.assign(table.methods.size(), 0.0);
    std::size_t h1_rows = 0;
    for (const auto& row : table.rows) {
        if (row.case_id == stats::kNullCase) continue;
        ++h1_rows;
        for (std::size_t k = 0; k < row.fractions.size(); ++k) table.mean_row[k] += row.fractions[k];
    }
    for (auto& v : table.mean_row) v = h1_rows ? v / static_cast<double>(h1_rows) : 0.0;
    return table;
}

// ---------------------------------------------------------------------------
// Table output

/// Three decimals with ties rounded to even ("0.6665" -> "0.666").
inline std::string format_fraction(double v)
{
    const double scaled = v * 1000.0;
    double whole = std::floor(scaled);
    const double frac = scaled - whole;
    if (std::fabs(frac - 0.5) < 1e-7) {
        if (std::fmod(whole, 2.0) != 0.0) whole += 1.0;
    } else if (frac > 0.5) {
        whole += 1.0;
    }
    const auto k = static_cast<long long>(whole);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%lld.%03lld", k < 0 ? "-" : "", std::llabs(k) / 1000, std::llabs(k) % 1000);
    return buf;
}

enum class TableFormat { Csv, Markdown };

namespace detail {

inline std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (quoted) throw FormatError("unterminated quote in CSV line: " + line);
    out.push_back(std::move(cur));
    return out;
}

} // namespace detail

/// CSV: header "case,label,<methods>", one row per case, then a "mean" row.
/// Markdown: the same grid as a pipe table.
inline std::string emit_table(const PowerTable& t, TableFormat format)
{
    std::ostringstream os;
    if (format == TableFormat::Csv) {
        os << "case,label";
        for (const auto& m : t.methods) os << ',' << detail::csv_field(m);
        os << '\n';
        for (const auto& r : t.rows) {
            os << r.case_id << ',' << detail::csv_field(r.label);
            for (double v : r.fractions) os << ',' << format_fraction(v);
            os << '\n';
        }
        os << "mean,";
        for (double v : t.mean_row) os << ',' << format_fraction(v);
        os << '\n';
        return os.str();
    }

    os << "| Cases | Distribution |";
    for (const auto& m : t.methods) os << ' ' << m << " |";
    os << "\n|---|---|";
    for (std::size_t k = 0; k < t.methods.size(); ++k) os << "---|";
    os << '\n';
    for (const auto& r : t.rows) {
        os << "| " << r.case_id << " | " << r.label << " |";
        for (double v : r.fractions) os << ' ' << format_fraction(v) << " |";
        os << '\n';
    }
    os << "| Mean | |";
    for (double v : t.mean_row) os << ' ' << format_fraction(v) << " |";
    os << '\n';
    return os.str();
}

/// Inverse of the CSV form of emit_table (fractions come back at 3-decimal precision).
inline PowerTable parse_table_csv(std::string_view text)
{
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& what) -> void {
        throw FormatError("power CSV line " + std::to_string(line_no) + ": " + what);
    };
    auto parse_real = [&](const std::string& s) {
        double v = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || ec != std::errc() || p != s.data() + s.size()) fail("malformed number '" + s + "'");
        return v;
    };

    PowerTable t;
    if (!std::getline(is, line)) throw FormatError("power CSV is empty");
    ++line_no;
    auto header = detail::split_csv_line(line);
    if (header.size() < 3 || header[0] != "case" || header[1] != "label") fail("header must start with case,label");
    t.methods.assign(header.begin() + 2, header.end());

    bool saw_mean = false;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (saw_mean) fail("content after the mean row");
        auto f = detail::split_csv_line(line);
        if (f.size() != header.size()) fail("expected " + std::to_string(header.size()) + " fields");
        std::vector<double> values;
        for (std::size_t k = 2; k < f.size(); ++k) values.push_back(parse_real(f[k]));
        if (f[0] == "mean") {
            t.mean_row = std::move(values);
            saw_mean = true;
            continue;
        }
        int id = 0;
        auto [p, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), id);
        if (ec != std::errc() || p != f[0].data() + f[0].size()) fail("malformed case id '" + f[0] + "'");
        t.rows.push_back({id, f[1], std::move(values)});
    }
    if (!saw_mean) throw FormatError("power CSV has no mean row");
    return t;
}

// ---------------------------------------------------------------------------
// Configuration files

namespace detail {

inline std::string config_trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& v)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == ',') {
            out.push_back(config_trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!config_trim(cur).empty() || !out.empty()) out.push_back(config_trim(cur));
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& v)
{
    T out{};
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || ec != std::errc() || p != v.data() + v.size()) {
        throw ConfigError("config key '" + key + "': malformed number '" + v + "'");
    }
    return out;
}

inline bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + v + "'");
}

// Key=value pairs in a list form; the same setter serves both file syntaxes.
inline void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value)
{
    auto size = [&] { return parse_number<std::size_t>(key, value); };
    auto real = [&] { return parse_number<double>(key, value); };
    TrainConfig& t = cfg.train;
    if (key == "methods") {
        cfg.methods.clear();
        for (const auto& m : split_list(value)) cfg.methods.push_back(parse_method(m));
    } else if (key == "reps") {
        cfg.reps = size();
    } else if (key == "n") {
        cfg.n = size();
        t.n = cfg.n;
    } else if (key == "calibration_reps") {
        cfg.calibration_reps = size();
    } else if (key == "alpha") {
        cfg.alpha = real();
        t.alpha = cfg.alpha;
    } else if (key == "master_seed" || key == "seed") {
        cfg.master_seed = parse_number<std::uint64_t>(key, value);
        t.master_seed = cfg.master_seed;
    } else if (key == "cases") {
        cfg.cases.clear();
        for (const auto& c : split_list(value)) cfg.cases.push_back(parse_number<int>(key, c));
    } else if (key == "output_csv" || key == "out") {
        cfg.output_csv = value;
    } else if (key == "output_markdown") {
        cfg.output_markdown = value;
    } else if (key == "h0_pool") {
        t.h0_pool = size();
    } else if (key == "h0_keep_fraction") {
        t.h0_keep_fraction = real();
    } else if (key == "h1_count") {
        t.h1_count = size();
    } else if (key == "h1_spec") {
        try {
            t.h1_spec = stats::parse_distribution(value);
        } catch (const DomainError& e) {
            throw ConfigError("config key 'h1_spec': " + std::string(e.what()));
        }
    } else if (key == "d") {
        t.d = size();
    } else if (key == "extractor") {
        try {
            t.extractor = parse_extractor(value);
        } catch (const FormatError& e) {
            throw ConfigError("config key 'extractor': " + std::string(e.what()));
        }
    } else if (key == "fresh_null") {
        t.fresh_null = parse_bool(key, value);
    } else if (key == "k" || key == "lmnn.k") {
        t.lmnn.k = size();
    } else if (key == "push_weight" || key == "lmnn.push_weight") {
        t.lmnn.push_weight = real();
    } else if (key == "margin" || key == "lmnn.margin") {
        t.lmnn.margin = real();
    } else if (key == "max_iters" || key == "lmnn.max_iters") {
        t.lmnn.max_iters = size();
    } else if (key == "step_size" || key == "lmnn.step_size") {
        t.lmnn.step_size = real();
    } else if (key == "tolerance" || key == "lmnn.tolerance") {
        t.lmnn.tolerance = real();
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

inline std::string json_scalar(const std::string& key, const nlohmann::json& v)
{
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number_float()) {
        char buf[64];
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v.get<double>());
        return std::string(buf, p);
    }
    throw ConfigError("config key '" + key + "': unsupported JSON value");
}

inline void apply_json(RunConfig& cfg, const nlohmann::json& obj, const std::string& prefix)
{
    for (const auto& [k, v] : obj.items()) {
        const std::string key = prefix + k;
        if (v.is_object()) {
            apply_json(cfg, v, key + ".");
        } else if (v.is_array()) {
            std::string joined;
            for (const auto& e : v) {
                if (!joined.empty()) joined += ',';
                joined += json_scalar(key, e);
            }
            apply_setting(cfg, key, joined);
        } else {
            apply_setting(cfg, key, json_scalar(key, v));
        }
    }
}

} // namespace detail

/// Parses a flat `key = value` file (# comments) or a JSON object. Unknown keys are errors.
inline RunConfig parse_run_config(std::string_view text)
{
    RunConfig cfg;
    const std::string body = detail::config_trim(text);
    if (!body.empty() && body.front() == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(body);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("malformed JSON config: ") + e.what());
        }
        detail::apply_json(cfg, j, "");
    } else {
        std::istringstream is(body);
        std::string line;
        std::size_t no = 0;
        while (std::getline(is, line)) {
            ++no;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.resize(hash);
            line = detail::config_trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(no) + ": expected key = value");
            detail::apply_setting(cfg, detail::config_trim(line.substr(0, eq)), detail::config_trim(line.substr(eq + 1)));
        }
    }
    cfg.validate();
    return cfg;
}

inline std::string read_text_file(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open file: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

inline RunConfig load_run_config(const std::string& path) { return parse_run_config(read_text_file(path)); }

/// Newline-delimited decimal reals; blank lines and # comments are skipped.
inline std::vector<double> parse_sample_text(std::string_view text)
{
    std::vector<double> out;
    std::istringstream is{std::string(text)};
    std::string line;
    std::size_t no = 0;
    while (std::getline(is, line)) {
        ++no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = detail::config_trim(line);
        if (line.empty()) continue;
        double v = 0;
        auto [p, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
        if (ec != std::errc() || p != line.data() + line.size() || !std::isfinite(v)) {
            throw FormatError("data line " + std::to_string(no) + ": malformed number '" + line + "'");
        }
        out.push_back(v);
    }
    return out;
}

} // namespace dnt
