#pragma once

#include "awmvc/common.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace awmvc {

/// One feature representation of the samples, stored features × samples.
struct ViewMatrix {
    std::string name;
    Matrix data;

    Index dim() const { return data.rows(); }
    Index samples() const { return data.cols(); }
};

/// V views over the same n samples, with optional 0-based ground-truth labels.
struct MultiViewDataset {
    std::string name = "dataset";
    std::vector<ViewMatrix> views;
    std::optional<Labels> labels;

    Index n() const { return views.empty() ? 0 : views.front().samples(); }
    std::size_t num_views() const { return views.size(); }

    int num_classes() const
    {
        if (!labels || labels->empty()) return 0;
        return *std::max_element(labels->begin(), labels->end()) + 1;
    }

    /// Throws ValidationError when any container invariant is broken.
    void validate() const
    {
        if (views.empty()) throw ValidationError("dataset has no views");
        const Index cols = views.front().samples();
        if (cols < 1) throw ValidationError("dataset has no samples");
        for (const auto& v : views) {
            if (v.dim() < 1)
                throw ValidationError("view '" + v.name + "' has no features");
            if (v.samples() != cols)
                throw ValidationError("view '" + v.name + "' has " + std::to_string(v.samples()) +
                                      " columns, expected " + std::to_string(cols));
            if (!all_finite(v.data))
                throw ValidationError("view '" + v.name + "' contains non-finite entries");
        }
        if (labels) {
            if (static_cast<Index>(labels->size()) != cols)
                throw ValidationError("labels length " + std::to_string(labels->size()) +
                                      " does not match n = " + std::to_string(cols));
            const int k = num_classes();
            std::vector<char> seen(static_cast<std::size_t>(std::max(k, 0)), 0);
            for (int l : *labels) {
                if (l < 0) throw ValidationError("negative label");
                seen[static_cast<std::size_t>(l)] = 1;
            }
            if (std::find(seen.begin(), seen.end(), 0) != seen.end())
                throw ValidationError("labels are not contiguous in [0, k)");
        }
    }
};

enum class PayloadFormat { Csv, Binary };

inline std::string to_string(PayloadFormat f) { return f == PayloadFormat::Csv ? "csv" : "bin"; }

/// Re-maps an arbitrary label alphabet to 0..k-1 in first-occurrence order.
template <class T>
Labels remap_labels(const std::vector<T>& raw)
{
    std::unordered_map<T, int> ids;
    Labels out;
    out.reserve(raw.size());
    for (const auto& r : raw) {
        auto [it, inserted] = ids.try_emplace(r, static_cast<int>(ids.size()));
        out.push_back(it->second);
    }
    return out;
}

namespace detail {

inline constexpr std::array<char, 4> kMagic{'M', 'V', 'D', 'M'};
inline constexpr std::uint32_t kBinaryVersion = 1;

template <class T>
void put_le(std::ostream& os, T value)
{
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <class T>
T get_le(const char* p)
{
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

inline std::string slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failure on " + path.string());
    return ss.str();
}

inline std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    return out;
}

// Shortest round-trip decimal; parsing it back yields the identical double.
inline void append_double(std::string& out, double v)
{
    std::array<char, 32> buf;
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    out.append(buf.data(), res.ptr);
}

inline double parse_double(std::string_view tok, const std::filesystem::path& path)
{
    while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
    while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
        tok.remove_suffix(1);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw ValidationError("malformed number '" + std::string(tok) + "' in " + path.string());
    return v;
}

} // namespace detail

inline void write_matrix_binary(const Matrix& m, const std::filesystem::path& path)
{
    auto out = detail::open_out(path);
    out.write(detail::kMagic.data(), detail::kMagic.size());
    detail::put_le<std::uint32_t>(out, detail::kBinaryVersion);
    detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.rows()));
    detail::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c) detail::put_le<double>(out, m(r, c));
    if (!out) throw IoError("write failure on " + path.string());
}

inline Matrix read_matrix_binary(const std::filesystem::path& path)
{
    const std::string buf = detail::slurp(path);
    constexpr std::size_t header = 4 + 4 + 8 + 8;
    if (buf.size() < header || std::memcmp(buf.data(), detail::kMagic.data(), 4) != 0)
        throw ValidationError(path.string() + ": not an MVDM matrix file");
    const auto version = detail::get_le<std::uint32_t>(buf.data() + 4);
    if (version != detail::kBinaryVersion)
        throw ValidationError(path.string() + ": unsupported MVDM version " + std::to_string(version));
    const auto rows = detail::get_le<std::uint64_t>(buf.data() + 8);
    const auto cols = detail::get_le<std::uint64_t>(buf.data() + 16);
    if (rows != 0 && cols > (buf.size() / 8) / rows)
        throw ValidationError(path.string() + ": header shape exceeds payload");
    if (buf.size() != header + rows * cols * 8)
        throw ValidationError(path.string() + ": payload size does not match header shape " +
                              std::to_string(rows) + "x" + std::to_string(cols));
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    const char* p = buf.data() + header;
    for (Index r = 0; r < m.rows(); ++r)
        for (Index c = 0; c < m.cols(); ++c, p += 8) m(r, c) = detail::get_le<double>(p);
    return m;
}

/// CSV orientation is one line per feature (row), n comma-separated values.
inline void write_matrix_csv(const Matrix& m, const std::filesystem::path& path)
{
    auto out = detail::open_out(path);
    std::string line;
    for (Index r = 0; r < m.rows(); ++r) {
        line.clear();
        for (Index c = 0; c < m.cols(); ++c) {
            if (c) line.push_back(',');
            detail::append_double(line, m(r, c));
        }
        line.push_back('\n');
        out << line;
    }
    if (!out) throw IoError("write failure on " + path.string());
}

inline Matrix read_matrix_csv(const std::filesystem::path& path)
{
    const std::string buf = detail::slurp(path);
    std::vector<double> values;
    Index rows = 0, cols = -1;
    std::size_t pos = 0;
    while (pos < buf.size()) {
        std::size_t eol = buf.find('\n', pos);
        if (eol == std::string::npos) eol = buf.size();
        std::string_view line(buf.data() + pos, eol - pos);
        pos = eol + 1;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        Index count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            values.push_back(detail::parse_double(line.substr(start, comma - start), path));
            ++count;
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (cols >= 0 && count != cols)
            throw ValidationError(path.string() + ": ragged CSV row " + std::to_string(rows + 1));
        cols = count;
        ++rows;
    }
    if (rows == 0) throw ValidationError(path.string() + ": empty matrix file");
    Matrix m(rows, cols);
    for (Index r = 0; r < rows; ++r)
        for (Index c = 0; c < cols; ++c) m(r, c) = values[static_cast<std::size_t>(r * cols + c)];
    return m;
}

/// Reads one integer label per line and re-maps to 0-based contiguous ids.
inline Labels read_labels_csv(const std::filesystem::path& path)
{
    const std::string buf = detail::slurp(path);
    std::vector<long long> raw;
    std::istringstream in(buf);
    std::string line;
    while (std::getline(in, line)) {
        std::string_view tok(line);
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.back()))) tok.remove_suffix(1);
        while (!tok.empty() && std::isspace(static_cast<unsigned char>(tok.front()))) tok.remove_prefix(1);
        if (tok.empty()) continue;
        long long v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
            throw ValidationError(path.string() + ": malformed label '" + std::string(tok) + "'");
        raw.push_back(v);
    }
    return remap_labels(raw);
}

inline void write_labels_csv(const Labels& labels, const std::filesystem::path& path)
{
    auto out = detail::open_out(path);
    for (int l : labels) out << l << '\n';
    if (!out) throw IoError("write failure on " + path.string());
}

/// Loads `meta.json` and the view/label files it references.
inline MultiViewDataset load_dataset(const std::filesystem::path& dir)
{
    const auto meta_path = dir / "meta.json";
    nlohmann::json meta;
    try {
        meta = nlohmann::json::parse(detail::slurp(meta_path));
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(meta_path.string() + ": " + e.what());
    }

    MultiViewDataset ds;
    try {
        ds.name = meta.value("name", std::string("dataset"));
        const auto n = meta.at("n").get<long long>();
        for (const auto& vj : meta.at("views")) {
            ViewMatrix view;
            view.name = vj.at("name").get<std::string>();
            const auto d = vj.at("d").get<long long>();
            const auto file = dir / vj.at("file").get<std::string>();
            const auto format = vj.value("format", std::string("bin"));
            if (format == "bin")
                view.data = read_matrix_binary(file);
            else if (format == "csv")
                view.data = read_matrix_csv(file);
            else
                throw ValidationError("view '" + view.name + "': unknown format '" + format + "'");
            if (view.dim() != d || view.samples() != n)
                throw ValidationError("view '" + view.name + "': payload is " +
                                      std::to_string(view.dim()) + "x" + std::to_string(view.samples()) +
                                      ", meta.json declares " + std::to_string(d) + "x" + std::to_string(n));
            ds.views.push_back(std::move(view));
        }
        if (meta.contains("labels_file") && !meta["labels_file"].is_null())
            ds.labels = read_labels_csv(dir / meta["labels_file"].get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(meta_path.string() + ": " + e.what());
    }
    ds.validate();
    return ds;
}

inline void save_dataset(const MultiViewDataset& ds, const std::filesystem::path& dir,
                         PayloadFormat format = PayloadFormat::Binary)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

    nlohmann::json meta;
    meta["name"] = ds.name;
    meta["n"] = ds.n();
    meta["views"] = nlohmann::json::array();
    for (std::size_t v = 0; v < ds.views.size(); ++v) {
        const auto& view = ds.views[v];
        const std::string file = "view" + std::to_string(v) + "." + to_string(format);
        if (format == PayloadFormat::Binary)
            write_matrix_binary(view.data, dir / file);
        else
            write_matrix_csv(view.data, dir / file);
        meta["views"].push_back(
            {{"name", view.name}, {"d", view.dim()}, {"file", file}, {"format", to_string(format)}});
    }
    if (ds.labels) {
        write_labels_csv(*ds.labels, dir / "labels.csv");
        meta["labels_file"] = "labels.csv";
    } else {
        meta["labels_file"] = nullptr;
    }
    auto out = detail::open_out(dir / "meta.json");
    out << meta.dump(2) << '\n';
    if (!out) throw IoError("write failure on meta.json");
}

/// Scales every sample column of every view to unit L2 norm. Zero columns stay zero.
inline MultiViewDataset normalize_per_sample_l2(MultiViewDataset ds)
{
    for (auto& v : ds.views) {
        for (Index c = 0; c < v.data.cols(); ++c) {
            const double norm = v.data.col(c).norm();
            if (norm > 0.0) v.data.col(c) /= norm;
        }
    }
    return ds;
}

// ---------------------------------------------------------------------------
// Synthetic multi-view Gaussian mixture
// ---------------------------------------------------------------------------

struct SyntheticSpec {
    Index n = 1000;
    std::size_t views = 3;
    int clusters = 5;
    Index latent_dim = 20;
    std::vector<Index> view_dims{50, 40, 30};
    double noise_sigma = 0.1;
    double center_spread = 5.0;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (n < 1 || views < 1 || clusters < 1 || latent_dim < 1)
            throw ValidationError("synthetic spec: n, views, clusters, latent_dim must be positive");
        if (view_dims.size() != views)
            throw ValidationError("synthetic spec: view_dims has " + std::to_string(view_dims.size()) +
                                  " entries for " + std::to_string(views) + " views");
        for (Index d : view_dims)
            if (d < 1) throw ValidationError("synthetic spec: view dims must be >= 1");
        if (n < clusters)
            throw ValidationError("synthetic spec: n = " + std::to_string(n) + " is smaller than clusters = " +
                                  std::to_string(clusters));
        if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
            throw ValidationError("synthetic spec: noise_sigma must be finite and >= 0");
        if (!(center_spread > 0.0) || !std::isfinite(center_spread))
            throw ValidationError("synthetic spec: center_spread must be finite and > 0");
    }
};

/// Cluster centers ~ N(0, spread² I) in latent space; sample i belongs to
/// cluster i mod k. View v observes P_v (center + σ ε) + σ η with a seeded
/// Gaussian map P_v scaled by 1/sqrt(latent_dim). When `noiseless_latent`
/// is given it receives each sample's cluster center (latent_dim × n).
inline MultiViewDataset generate_synthetic(const SyntheticSpec& spec, Matrix* noiseless_latent = nullptr)
{
    spec.validate();
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto draw = [&](Index rows, Index cols) {
        Matrix m(rows, cols);
        for (Index c = 0; c < cols; ++c)
            for (Index r = 0; r < rows; ++r) m(r, c) = gauss(rng);
        return m;
    };

    const Matrix centers = spec.center_spread * draw(spec.latent_dim, spec.clusters);
    Matrix latent(spec.latent_dim, spec.n);
    if (noiseless_latent) noiseless_latent->resize(spec.latent_dim, spec.n);
    Labels labels(static_cast<std::size_t>(spec.n));
    for (Index i = 0; i < spec.n; ++i) {
        const int c = static_cast<int>(i % spec.clusters);
        labels[static_cast<std::size_t>(i)] = c;
        latent.col(i) = centers.col(c);
        if (noiseless_latent) noiseless_latent->col(i) = centers.col(c);
        if (spec.noise_sigma > 0.0)
            for (Index r = 0; r < spec.latent_dim; ++r) latent(r, i) += spec.noise_sigma * gauss(rng);
    }

    MultiViewDataset ds;
    ds.name = "synthetic";
    for (std::size_t v = 0; v < spec.views; ++v) {
        const Matrix map = draw(spec.view_dims[v], spec.latent_dim) / std::sqrt(double(spec.latent_dim));
        ViewMatrix view{"view" + std::to_string(v), map * latent};
        if (spec.noise_sigma > 0.0) view.data += spec.noise_sigma * draw(view.dim(), spec.n);
        ds.views.push_back(std::move(view));
    }
    ds.labels = std::move(labels);
    return ds;
}

} // namespace awmvc
