#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dnt/engine.hpp"
#include "dnt/errors.hpp"

namespace dnt {

/// Model files are line-oriented text: `<key> <value...>`, one field per line,
/// framed by a `format dnt-model` / `version N` header and an `end` line.
/// Reals are written as hexadecimal floating point so a round trip is bit-exact.
inline constexpr int kModelFormatVersion = 1;

namespace model_io_detail {

inline std::string hex(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::hex);
    return std::string(buf, end);
}

template <class Range>
std::string join_hex(const Range& r)
{
    std::string s;
    for (double v : r) {
        s += ' ';
        s += hex(v);
    }
    return s;
}

struct Field {
    std::size_t line = 0;
    std::vector<std::string> tokens;
};

class Reader {
public:
    explicit Reader(std::istream& is)
    {
        std::string line;
        std::size_t no = 0;
        bool ended = false;
        while (std::getline(is, line)) {
            ++no;
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            std::string key;
            ls >> key;
            if (key == "end") {
                ended = true;
                break;
            }
            Field f{no, {}};
            for (std::string tok; ls >> tok;) f.tokens.push_back(tok);
            if (fields_.count(key)) throw FormatError("model file line " + std::to_string(no) + ": duplicate field '" + key + "'");
            fields_.emplace(key, std::move(f));
        }
        if (!ended) throw FormatError("model file truncated: missing 'end' after line " + std::to_string(no));
    }

    const Field& get(const std::string& key) const
    {
        auto it = fields_.find(key);
        if (it == fields_.end()) throw FormatError("model file: missing field '" + key + "'");
        return it->second;
    }

    std::string text(const std::string& key) const
    {
        const auto& f = get(key);
        if (f.tokens.size() != 1) fail(key, f, "expected one value");
        return f.tokens[0];
    }

    double real(const std::string& key) const
    {
        const auto& f = get(key);
        if (f.tokens.size() != 1) fail(key, f, "expected one value");
        return parse_real(key, f, f.tokens[0]);
    }

    std::uint64_t integer(const std::string& key) const
    {
        const auto& f = get(key);
        if (f.tokens.size() != 1) fail(key, f, "expected one value");
        return parse_int(key, f, f.tokens[0]);
    }

    /// Leading count followed by that many reals.
    std::vector<double> reals(const std::string& key) const
    {
        const auto& f = get(key);
        if (f.tokens.empty()) fail(key, f, "missing element count");
        const auto count = parse_int(key, f, f.tokens[0]);
        if (f.tokens.size() != count + 1) {
            fail(key, f, "expected " + std::to_string(count) + " values, found " + std::to_string(f.tokens.size() - 1));
        }
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = parse_real(key, f, f.tokens[i + 1]);
        return out;
    }

    std::vector<std::size_t> indices(const std::string& key) const
    {
        const auto& f = get(key);
        if (f.tokens.empty()) fail(key, f, "missing element count");
        const auto count = parse_int(key, f, f.tokens[0]);
        if (f.tokens.size() != count + 1) fail(key, f, "element count does not match");
        std::vector<std::size_t> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = parse_int(key, f, f.tokens[i + 1]);
        return out;
    }

    [[noreturn]] static void fail(const std::string& key, const Field& f, const std::string& what)
    {
        throw FormatError("model file line " + std::to_string(f.line) + ", field '" + key + "': " + what);
    }

private:
    static double parse_real(const std::string& key, const Field& f, const std::string& tok)
    {
        double v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v, std::chars_format::hex);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail(key, f, "malformed real '" + tok + "'");
        return v;
    }

    static std::uint64_t parse_int(const std::string& key, const Field& f, const std::string& tok)
    {
        std::uint64_t v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail(key, f, "malformed integer '" + tok + "'");
        return v;
    }

    std::map<std::string, Field> fields_;
};

} // namespace model_io_detail

inline void write_model(std::ostream& os, const DNTModel& m)
{
    using model_io_detail::hex;
    using model_io_detail::join_hex;
    const auto& c = m.config;
    os << "format dnt-model\n";
    os << "version " << kModelFormatVersion << '\n';
    os << "extractor " << to_string(m.extractor) << '\n';
    os << "n " << m.n << '\n';
    os << "alpha " << hex(m.alpha) << '\n';
    os << "cutoff " << hex(m.cutoff) << '\n';
    os << "d " << m.selection.d << '\n';
    os << "mask " << m.selection.mask.size();
    for (auto i : m.selection.mask) os << ' ' << i;
    os << '\n';
    os << "scores " << m.selection.scores.size() << join_hex(m.selection.scores) << '\n';
    os << "metric " << m.metric.m.size();
    for (Eigen::Index r = 0; r < m.metric.m.rows(); ++r) {
        for (Eigen::Index k = 0; k < m.metric.m.cols(); ++k) os << ' ' << hex(m.metric.m(r, k));
    }
    os << '\n';
    os << "centroid " << m.centroid.size() << join_hex(m.centroid) << '\n';
    os << "null_distances " << m.null_distances.size() << join_hex(m.null_distances) << '\n';
    os << "config.n " << c.n << '\n';
    os << "config.h0_pool " << c.h0_pool << '\n';
    os << "config.h0_keep_fraction " << hex(c.h0_keep_fraction) << '\n';
    os << "config.h1_count " << c.h1_count << '\n';
    os << "config.h1_spec " << stats::label(c.h1_spec) << '\n';
    os << "config.d " << c.d << '\n';
    os << "config.extractor " << to_string(c.extractor) << '\n';
    os << "config.alpha " << hex(c.alpha) << '\n';
    os << "config.fresh_null " << (c.fresh_null ? 1 : 0) << '\n';
    os << "config.master_seed " << c.master_seed << '\n';
    os << "config.lmnn.k " << c.lmnn.k << '\n';
    os << "config.lmnn.push_weight " << hex(c.lmnn.push_weight) << '\n';
    os << "config.lmnn.margin " << hex(c.lmnn.margin) << '\n';
    os << "config.lmnn.max_iters " << c.lmnn.max_iters << '\n';
    os << "config.lmnn.step_size " << hex(c.lmnn.step_size) << '\n';
    os << "config.lmnn.tolerance " << hex(c.lmnn.tolerance) << '\n';
    os << "end\n";
}

inline DNTModel read_model(std::istream& is)
{
    const model_io_detail::Reader in(is);
    if (in.text("format") != "dnt-model") throw FormatError("not a dnt model file");
    const auto version = in.integer("version");
    if (version != static_cast<std::uint64_t>(kModelFormatVersion)) {
        throw UnsupportedVersionError("unsupported model format version " + std::to_string(version) +
                                      " (this build reads version " + std::to_string(kModelFormatVersion) + ")");
    }

    DNTModel m;
    try {
        m.extractor = parse_extractor(in.text("extractor"));
        m.config.extractor = parse_extractor(in.text("config.extractor"));
        m.config.h1_spec = stats::parse_distribution(in.text("config.h1_spec"));
    } catch (const DomainError& e) {
        throw FormatError(std::string("model file: ") + e.what());
    }
    m.n = in.integer("n");
    m.alpha = in.real("alpha");
    m.cutoff = in.real("cutoff");
    m.selection.d = in.integer("d");
    m.selection.mask = in.indices("mask");
    m.selection.scores = in.reals("scores");
    const auto metric = in.reals("metric");
    m.centroid = in.reals("centroid");
    m.null_distances = in.reals("null_distances");

    const auto d = m.selection.d;
    if (m.selection.mask.size() != d) model_io_detail::Reader::fail("mask", in.get("mask"), "length differs from d");
    for (std::size_t i = 0; i < d; ++i) {
        if (m.selection.mask[i] >= m.selection.scores.size() || (i > 0 && m.selection.mask[i] <= m.selection.mask[i - 1])) {
            model_io_detail::Reader::fail("mask", in.get("mask"), "indices must be increasing and within the score vector");
        }
    }
    if (metric.size() != d * d) model_io_detail::Reader::fail("metric", in.get("metric"), "expected d*d values");
    if (m.centroid.size() != d) model_io_detail::Reader::fail("centroid", in.get("centroid"), "length differs from d");
    if (m.null_distances.empty()) model_io_detail::Reader::fail("null_distances", in.get("null_distances"), "empty");
    const auto di = static_cast<Eigen::Index>(d);
    m.metric.m.resize(di, di);
    for (Eigen::Index r = 0; r < di; ++r) {
        for (Eigen::Index k = 0; k < di; ++k) m.metric.m(r, k) = metric[static_cast<std::size_t>(r * di + k)];
    }

    auto& c = m.config;
    c.n = in.integer("config.n");
    c.h0_pool = in.integer("config.h0_pool");
    c.h0_keep_fraction = in.real("config.h0_keep_fraction");
    c.h1_count = in.integer("config.h1_count");
    c.d = in.integer("config.d");
    c.alpha = in.real("config.alpha");
    c.fresh_null = in.integer("config.fresh_null") != 0;
    c.master_seed = in.integer("config.master_seed");
    c.lmnn.k = in.integer("config.lmnn.k");
    c.lmnn.push_weight = in.real("config.lmnn.push_weight");
    c.lmnn.margin = in.real("config.lmnn.margin");
    c.lmnn.max_iters = in.integer("config.lmnn.max_iters");
    c.lmnn.step_size = in.real("config.lmnn.step_size");
    c.lmnn.tolerance = in.real("config.lmnn.tolerance");
    return m;
}

inline void save_model(const DNTModel& m, const std::string& path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open model file for writing: " + path);
    write_model(os, m);
    if (!os) throw IoError("failed writing model file: " + path);
}

inline DNTModel load_model(const std::string& path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open model file: " + path);
    return read_model(is);
}

} // namespace dnt
