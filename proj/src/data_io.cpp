#include "ddopt/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <unordered_set>

#include "ddopt/partitioner.hpp"
#include "ddopt/rng.hpp"

namespace ddopt {

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

std::size_t SyntheticOptions::nnz_per_row() const {
    if (density >= 1.0) return m();
    const auto k = static_cast<std::size_t>(std::llround(density * static_cast<double>(m())));
    return std::clamp<std::size_t>(k, 1, m());
}

void SyntheticOptions::validate() const {
    if (!(density > 0.0 && density <= 1.0)) throw Error(Errc::InvalidDensity, "density must lie in (0, 1]");
    if (P < 1 || Q < 1 || rows_per_block < 1 || cols_per_block < 1)
        throw Error(Errc::InvalidArgument, "synthetic dimensions must be at least 1");
    if (!(flip_prob >= 0.0 && flip_prob <= 1.0)) throw Error(Errc::InvalidArgument, "flip probability must lie in [0, 1]");
}

namespace {

// k distinct positions in [0, m), sorted (Floyd's sampling).
std::vector<std::uint32_t> sample_positions(std::size_t k, std::size_t m, RngStream& rng) {
    std::vector<std::uint32_t> out;
    if (k == m) {
        out.resize(m);
        std::iota(out.begin(), out.end(), 0u);
        return out;
    }
    std::unordered_set<std::uint32_t> chosen;
    chosen.reserve(2 * k);
    for (std::size_t j = m - k; j < m; ++j) {
        const auto t = static_cast<std::uint32_t>(rng.next_index(j + 1));
        if (!chosen.insert(t).second) chosen.insert(static_cast<std::uint32_t>(j));
    }
    out.assign(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

SyntheticData generate_synthetic(const SyntheticOptions& opts) {
    opts.validate();
    const std::size_t n = opts.n(), m = opts.m(), k = opts.nnz_per_row();

    SyntheticData out;
    auto wrng = rng_stream(opts.seed, {"planted"});
    out.planted_w.resize(m);
    for (double& v : out.planted_w) v = wrng.uniform(-1.0, 1.0);

    Dataset ds;
    ds.x.set_cols(m);
    ds.y.reserve(n);
    std::vector<double> val(k);
    for (std::size_t i = 0; i < n; ++i) {
        auto rng = rng_stream(opts.seed, {"row", i});
        const auto idx = sample_positions(k, m, rng);
        double margin = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            val[c] = rng.uniform(-1.0, 1.0);
            margin += val[c] * out.planted_w[idx[c]];
        }
        double y = margin < 0.0 ? -1.0 : 1.0;
        if (rng.bernoulli(opts.flip_prob)) {
            y = -y;
            ++out.flipped;
        }
        ds.x.push_row(idx, val);
        ds.y.push_back(y);
    }
    if (opts.standardize) standardize(ds);
    out.data = split(ds, make_grid(n, m, opts.P, opts.Q));
    return out;
}

// ---------------------------------------------------------------------------
// LIBSVM
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& reason) {
    throw Error(Errc::ParseError, "line " + std::to_string(line) + ": " + reason, {std::int64_t(line)});
}

bool parse_double(std::string_view tok, double& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
    return ec == std::errc() && ptr == tok.data() + tok.size();
}

}  // namespace

Dataset read_libsvm(std::istream& in) {
    Dataset ds;
    std::vector<std::size_t> ptr{0};
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    std::vector<double> raw_labels;
    std::size_t max_col = 0;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view rest(line);
        if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
        const auto next_token = [&rest]() {
            const auto b = rest.find_first_not_of(" \t\r");
            if (b == std::string_view::npos) {
                rest = {};
                return std::string_view{};
            }
            rest.remove_prefix(b);
            const auto e = std::min(rest.find_first_of(" \t\r"), rest.size());
            const auto tok = rest.substr(0, e);
            rest.remove_prefix(e);
            return tok;
        };

        auto tok = next_token();
        if (tok.empty()) continue;
        double label = 0.0;
        if (!parse_double(tok, label)) parse_fail(lineno, "bad label '" + std::string(tok) + "'");
        raw_labels.push_back(label);

        std::uint64_t prev = 0;
        while (!(tok = next_token()).empty()) {
            const auto colon = tok.find(':');
            if (colon == std::string_view::npos) parse_fail(lineno, "expected idx:val, got '" + std::string(tok) + "'");
            std::uint64_t j = 0;
            const auto is = tok.substr(0, colon);
            const auto [p, ec] = std::from_chars(is.data(), is.data() + is.size(), j);
            if (ec != std::errc() || p != is.data() + is.size()) parse_fail(lineno, "bad index '" + std::string(is) + "'");
            if (j == 0) parse_fail(lineno, "indices are 1-based");
            if (j <= prev) parse_fail(lineno, "non-increasing index");
            if (j > 0xFFFFFFFFull) parse_fail(lineno, "index too large");
            double v = 0.0;
            if (!parse_double(tok.substr(colon + 1), v)) parse_fail(lineno, "bad value in '" + std::string(tok) + "'");
            prev = j;
            idx.push_back(static_cast<std::uint32_t>(j - 1));
            val.push_back(v);
            max_col = std::max<std::size_t>(max_col, j);
        }
        ptr.push_back(val.size());
    }
    if (in.bad()) throw Error(Errc::IoError, "read failure");

    std::set<double> distinct(raw_labels.begin(), raw_labels.end());
    const auto subset = [&](std::initializer_list<double> allowed) {
        return std::all_of(distinct.begin(), distinct.end(), [&](double v) {
            return std::find(allowed.begin(), allowed.end(), v) != allowed.end();
        });
    };
    double negative = -1.0;
    if (subset({-1.0, 1.0}))
        negative = -1.0;
    else if (subset({0.0, 1.0}))
        negative = 0.0;
    else if (subset({1.0, 2.0}))
        negative = 1.0;
    else
        throw Error(Errc::NonBinaryLabels, "labels are not a binary {-1,+1}, {0,1} or {1,2} encoding");
    ds.y.reserve(raw_labels.size());
    for (double l : raw_labels) ds.y.push_back(l == negative ? -1.0 : 1.0);

    const auto rows = ptr.size() - 1;
    ds.x = CsrMatrix(rows, max_col, std::move(ptr), std::move(idx), std::move(val));
    return ds;
}

Dataset read_libsvm(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
    return read_libsvm(in);
}

void write_libsvm(const Dataset& data, std::ostream& out) {
    char buf[64];
    for (std::size_t i = 0; i < data.n(); ++i) {
        out << (data.y[i] > 0 ? "+1" : "-1");
        const auto r = data.x.row(i);
        for (std::size_t k = 0; k < r.nnz(); ++k) {
            const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, r.value[k]);
            out << ' ' << (r.index[k] + 1) << ':' << std::string_view(buf, static_cast<std::size_t>(p - buf));
        }
        out << '\n';
    }
}

double sparsity(const Dataset& data) {
    return static_cast<double>(data.x.nnz()) / (static_cast<double>(data.n()) * static_cast<double>(data.m()));
}

// ---------------------------------------------------------------------------

void standardize(Dataset& data) {
    const std::size_t n = data.n(), m = data.m();
    if (n == 0) return;
    const auto& idx = data.x.col_idx();
    auto& val = data.x.mutable_values();
    std::vector<double> sum(m, 0.0), count(m, 0.0), sq(m, 0.0);
    for (std::size_t k = 0; k < val.size(); ++k) {
        sum[idx[k]] += val[k];
        count[idx[k]] += 1.0;
    }
    const double nd = static_cast<double>(n);
    std::vector<double> mean(m);
    for (std::size_t j = 0; j < m; ++j) mean[j] = sum[j] / nd;
    for (std::size_t k = 0; k < val.size(); ++k) {
        const double d = val[k] - mean[idx[k]];
        sq[idx[k]] += d * d;
    }
    std::vector<double> scale(m, 1.0);
    for (std::size_t j = 0; j < m; ++j) {
        const double var = (sq[j] + (nd - count[j]) * mean[j] * mean[j]) / nd;
        if (var > 0.0) scale[j] = 1.0 / std::sqrt(var);
    }
    for (std::size_t k = 0; k < val.size(); ++k) val[k] *= scale[idx[k]];
}

DatasetPermutation make_shuffle(std::size_t n, std::size_t m, std::uint64_t seed) {
    const auto shuffle = [](std::size_t len, RngStream rng) {
        std::vector<std::size_t> perm(len);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = len; i > 1; --i) std::swap(perm[i - 1], perm[rng.next_index(i)]);
        return perm;
    };
    return {shuffle(n, rng_stream(seed, {"shuffle-rows"})), shuffle(m, rng_stream(seed, {"shuffle-cols"}))};
}

DatasetPermutation invert(const DatasetPermutation& perm) {
    DatasetPermutation inv{std::vector<std::size_t>(perm.rows.size()), std::vector<std::size_t>(perm.cols.size())};
    for (std::size_t k = 0; k < perm.rows.size(); ++k) inv.rows[perm.rows[k]] = k;
    for (std::size_t k = 0; k < perm.cols.size(); ++k) inv.cols[perm.cols[k]] = k;
    return inv;
}

Dataset apply_permutation(const Dataset& data, const DatasetPermutation& perm) {
    if (perm.rows.size() != data.n() || perm.cols.size() != data.m())
        throw Error(Errc::DimensionMismatch, "permutation does not match dataset");
    const auto inv_cols = invert(perm).cols;  // old column -> new column
    Dataset out;
    out.x.set_cols(data.m());
    out.y.reserve(data.n());
    std::vector<std::pair<std::uint32_t, double>> entries;
    std::vector<std::uint32_t> idx;
    std::vector<double> val;
    for (std::size_t r = 0; r < data.n(); ++r) {
        const auto row = data.x.row(perm.rows[r]);
        entries.clear();
        for (std::size_t k = 0; k < row.nnz(); ++k)
            entries.emplace_back(static_cast<std::uint32_t>(inv_cols[row.index[k]]), row.value[k]);
        std::sort(entries.begin(), entries.end());
        idx.clear();
        val.clear();
        for (const auto& [j, v] : entries) {
            idx.push_back(j);
            val.push_back(v);
        }
        out.x.push_row(idx, val);
        out.y.push_back(data.y[perm.rows[r]]);
    }
    return out;
}

PartitionedData partition_dataset(const Dataset& data, std::size_t P, std::size_t Q,
                                  std::optional<std::uint64_t> shuffle_seed) {
    const auto grid = make_grid(data.n(), data.m(), P, Q);
    if (!shuffle_seed) return split(data, grid);
    return split(apply_permutation(data, make_shuffle(data.n(), data.m(), *shuffle_seed)), grid);
}

// ---------------------------------------------------------------------------
// Binary cache
// ---------------------------------------------------------------------------

namespace {

constexpr char kMagic[5] = {'G', 'O', 'P', 'T', '1'};

template <class T>
void put(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
void put_vec(std::ostream& out, const std::vector<T>& v) {
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(T)));
}

template <class T>
T get(std::istream& in) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw Error(Errc::IoError, "truncated cache file");
    return v;
}

template <class T>
std::vector<T> get_vec(std::istream& in, std::size_t count) {
    std::vector<T> v(count);
    if (!in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(count * sizeof(T))))
        throw Error(Errc::IoError, "truncated cache file");
    return v;
}

}  // namespace

void write_cache(const std::string& path, const PartitionedData& data, double density, std::uint64_t seed) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::IoError, "cannot write '" + path + "'");
    out.write(kMagic, sizeof kMagic);
    const auto& g = data.grid;
    put<std::uint64_t>(out, g.n());
    put<std::uint64_t>(out, g.m());
    put<std::uint64_t>(out, g.P);
    put<std::uint64_t>(out, g.Q);
    put<double>(out, density);
    put<std::uint64_t>(out, seed);
    for (const auto& b : data.blocks) {
        put<std::uint64_t>(out, b.rows());
        put<std::uint64_t>(out, b.cols());
        put<std::uint64_t>(out, b.x.nnz());
        std::vector<std::uint64_t> ptr(b.x.row_ptr().begin(), b.x.row_ptr().end());
        put_vec(out, ptr);
        put_vec(out, b.x.col_idx());
        put_vec(out, b.x.values());
        if (b.q == 0) put_vec(out, *b.labels);
    }
    if (!out) throw Error(Errc::IoError, "write failure on '" + path + "'");
}

bool is_cache_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    char magic[5] = {};
    return in.read(magic, sizeof magic) && std::memcmp(magic, kMagic, sizeof kMagic) == 0;
}

PartitionedData read_cache(const std::string& path, CacheHeader* header) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot open '" + path + "'");
    char magic[5] = {};
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw Error(Errc::ParseError, "'" + path + "' is not a GOPT1 cache file", {0});
    CacheHeader h;
    h.n = get<std::uint64_t>(in);
    h.m = get<std::uint64_t>(in);
    h.P = get<std::uint64_t>(in);
    h.Q = get<std::uint64_t>(in);
    h.density = get<double>(in);
    h.seed = get<std::uint64_t>(in);
    if (header) *header = h;

    PartitionedData data;
    data.grid = make_grid(h.n, h.m, h.P, h.Q);
    Labels labels;
    for (std::size_t p = 0; p < h.P; ++p) {
        for (std::size_t q = 0; q < h.Q; ++q) {
            const auto rows = get<std::uint64_t>(in);
            const auto cols = get<std::uint64_t>(in);
            const auto nnz = get<std::uint64_t>(in);
            auto ptr64 = get_vec<std::uint64_t>(in, rows + 1);
            std::vector<std::size_t> ptr(ptr64.begin(), ptr64.end());
            auto idx = get_vec<std::uint32_t>(in, nnz);
            auto val = get_vec<double>(in, nnz);
            if (q == 0) labels = std::make_shared<const std::vector<double>>(get_vec<double>(in, rows));
            data.blocks.push_back(DataBlock{p, q, CsrMatrix(rows, cols, std::move(ptr), std::move(idx), std::move(val)),
                                            labels});
        }
    }
    validate_dataset(data.blocks, data.grid);
    return data;
}

}  // namespace ddopt
