#include "flowlab/noise.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace flowlab {

namespace {

// splitmix64 finalizer; chained over the words of the counter tuple.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_counter(std::uint64_t key, std::uint64_t word, std::uint64_t lane) {
    std::uint64_t h = mix64(key ^ word);
    return mix64(h ^ (lane * 0xD1B54A32D192ED03ULL));
}

// uniform in (0, 1]; never 0 so log() stays finite
inline double to_unit(std::uint64_t h) {
    return (static_cast<double>(h >> 11) + 1.0) * 0x1.0p-53;
}

} // namespace

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t path_index, int dimension)
    : seed_(seed), path_index_(path_index), dimension_(dimension) {
    if (dimension < 1) throw std::invalid_argument("NoiseStream: dimension must be >= 1");
    key_ = mix64(mix64(seed) ^ path_index);
}

double NoiseStream::gaussian(std::uint64_t step, int coord) const {
    if (coord < 0 || coord >= dimension_)
        throw std::invalid_argument("NoiseStream: coordinate out of range");
    // Box-Muller on a pair of counter hashes; the (step, coord) pair index
    // selects which half of the transform this variate is.
    const std::uint64_t g = step * static_cast<std::uint64_t>(dimension_) +
                            static_cast<std::uint64_t>(coord);
    const std::uint64_t pair = g >> 1;
    const double u1 = to_unit(hash_counter(key_, pair, 0));
    const double u2 = to_unit(hash_counter(key_, pair, 1));
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    return (g & 1) ? r * std::sin(theta) : r * std::cos(theta);
}

double NoiseStream::uniform(std::uint64_t step, int tag) const {
    if (tag < 0) throw std::invalid_argument("NoiseStream: tag must be >= 0");
    // lanes 0 and 1 belong to the gaussian pairs
    return to_unit(hash_counter(key_, step, 3 + static_cast<std::uint64_t>(tag)));
}

void NoiseStream::fill_increment(std::uint64_t step, double dt, std::span<double> out) const {
    if (out.size() != static_cast<std::size_t>(dimension_))
        throw std::invalid_argument("NoiseStream: output span size mismatch");
    const double sd = std::sqrt(dt);
    const std::uint64_t base = step * static_cast<std::uint64_t>(dimension_);
    std::size_t c = 0;
    // Consume hash pairs two variates at a time; recompute a half-pair at the
    // edges so values match gaussian(step, coord) exactly.
    while (c < out.size()) {
        const std::uint64_t g = base + c;
        const std::uint64_t pair = g >> 1;
        const double u1 = to_unit(hash_counter(key_, pair, 0));
        const double u2 = to_unit(hash_counter(key_, pair, 1));
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        if ((g & 1) == 0) {
            out[c] = sd * (r * std::cos(theta));
            if (c + 1 < out.size()) {
                out[c + 1] = sd * (r * std::sin(theta));
                c += 2;
            } else {
                ++c;
            }
        } else {
            out[c] = sd * (r * std::sin(theta));
            ++c;
        }
    }
}

std::vector<PointN> generate_increments(const NoiseStream& stream, std::size_t steps, double dt) {
    if (steps < 1) throw std::invalid_argument("generate_increments: steps must be >= 1");
    if (!(dt >= 0.0)) throw std::invalid_argument("generate_increments: dt must be >= 0");
    std::vector<PointN> out(steps, PointN(static_cast<std::size_t>(stream.dimension()), 0.0));
    for (std::size_t k = 0; k < steps; ++k)
        stream.fill_increment(k, dt, out[k]);
    return out;
}

BrownianPath generate_path(const NoiseStream& stream, const std::vector<double>& dt_schedule,
                           const PointN& start) {
    const auto n = static_cast<std::size_t>(stream.dimension());
    PointN x(n, 0.0);
    if (!start.empty()) {
        if (start.size() != n) throw std::invalid_argument("generate_path: start dimension mismatch");
        x = start;
    }
    BrownianPath path;
    path.dimension = stream.dimension();
    path.times.reserve(dt_schedule.size() + 1);
    path.positions.reserve((dt_schedule.size() + 1) * n);
    path.times.push_back(0.0);
    path.positions.insert(path.positions.end(), x.begin(), x.end());
    std::vector<double> dw(n);
    double t = 0.0;
    for (std::size_t k = 0; k < dt_schedule.size(); ++k) {
        stream.fill_increment(k, dt_schedule[k], dw);
        for (std::size_t i = 0; i < n; ++i) x[i] += dw[i];
        t += dt_schedule[k];
        path.times.push_back(t);
        path.positions.insert(path.positions.end(), x.begin(), x.end());
    }
    return path;
}

double running_max_abs(const BrownianPath& path, int coordinate) {
    if (path.times.empty()) throw std::invalid_argument("running_max_abs: empty path");
    if (coordinate < 0 || coordinate >= path.dimension)
        throw std::invalid_argument("running_max_abs: coordinate out of range");
    double m = 0.0;
    const auto n = static_cast<std::size_t>(path.dimension);
    for (std::size_t i = static_cast<std::size_t>(coordinate); i < path.positions.size(); i += n)
        m = std::max(m, std::abs(path.positions[i]));
    return m;
}

// ---------------------------------------------------------------------------
// Binary persistence

namespace {

constexpr char kMagic[4] = {'B', 'P', 'T', 'H'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "path dump assumes a little-endian host");

void write_all(std::FILE* f, const void* p, std::size_t bytes) {
    if (std::fwrite(p, 1, bytes, f) != bytes)
        throw std::runtime_error("BrownianPath: short write");
}

void read_all(std::FILE* f, void* p, std::size_t bytes) {
    if (std::fread(p, 1, bytes, f) != bytes)
        throw std::runtime_error("BrownianPath: short read");
}

} // namespace

void BrownianPath::save(const std::string& file) const {
    std::FILE* f = std::fopen(file.c_str(), "wb");
    if (!f) throw std::runtime_error("BrownianPath: cannot open '" + file + "' for writing");
    try {
        write_all(f, kMagic, 4);
        write_all(f, &kVersion, sizeof kVersion);
        const std::uint64_t n = static_cast<std::uint64_t>(dimension);
        const std::uint64_t m = steps();
        write_all(f, &n, sizeof n);
        write_all(f, &m, sizeof m);
        std::vector<double> schedule(m);
        for (std::uint64_t k = 0; k < m; ++k) schedule[k] = times[k + 1] - times[k];
        if (m) write_all(f, schedule.data(), m * sizeof(double));
        write_all(f, positions.data(), positions.size() * sizeof(double));
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
}

BrownianPath BrownianPath::load(const std::string& file) {
    std::FILE* f = std::fopen(file.c_str(), "rb");
    if (!f) throw std::runtime_error("BrownianPath: cannot open '" + file + "'");
    BrownianPath path;
    try {
        char magic[4];
        std::uint32_t version = 0;
        read_all(f, magic, 4);
        if (std::memcmp(magic, kMagic, 4) != 0)
            throw std::runtime_error("BrownianPath: bad magic");
        read_all(f, &version, sizeof version);
        if (version != kVersion) throw std::runtime_error("BrownianPath: unsupported version");
        std::uint64_t n = 0, m = 0;
        read_all(f, &n, sizeof n);
        read_all(f, &m, sizeof m);
        if (n == 0 || n > (1u << 20)) throw std::runtime_error("BrownianPath: bad dimension");
        path.dimension = static_cast<int>(n);
        std::vector<double> schedule(m);
        if (m) read_all(f, schedule.data(), m * sizeof(double));
        path.times.resize(m + 1);
        path.times[0] = 0.0;
        for (std::uint64_t k = 0; k < m; ++k) path.times[k + 1] = path.times[k] + schedule[k];
        path.positions.resize((m + 1) * n);
        read_all(f, path.positions.data(), path.positions.size() * sizeof(double));
    } catch (...) {
        std::fclose(f);
        throw;
    }
    std::fclose(f);
    return path;
}

} // namespace flowlab
