#include "nsreduce/grid.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nsreduce {

namespace {

constexpr char kMagic[4] = {'N', 'S', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

void require(bool ok, const std::string& msg) {
    if (!ok) throw std::invalid_argument(msg);
}

}  // namespace

void GridSpec::validate() const {
    for (int a = 0; a < 3; ++a) {
        require(std::isfinite(origin[a]), "grid: origin must be finite");
        require(extent[a] > 0.0 && std::isfinite(extent[a]), "grid: extent must be positive");
        require(n_space[a] >= 9, "grid: n_space must be at least 9 per axis");
    }
    require(time_horizon > 0.0 && std::isfinite(time_horizon), "grid: T must be positive");
    require(n_time >= 5, "grid: n_time must be at least 5");
}

double GridSpec::spacetime_diameter() const {
    double s = time_horizon * time_horizon;
    for (int a = 0; a < 3; ++a) s += extent[a] * extent[a];
    return std::sqrt(s);
}

double ScalarField::sup_norm() const {
    double m = 0.0;
    for (double v : values) m = std::max(m, std::abs(v));
    return m;
}

double ScalarField::boundary_jump() const {
    const auto& n = grid.n_space;
    double m = 0.0;
    for (int it = 0; it < grid.n_time; ++it) {
        const bool t_face = (it == 0 || it == grid.n_time - 1);
        for (int i = 0; i < n[0]; ++i)
            for (int j = 0; j < n[1]; ++j)
                for (int k = 0; k < n[2]; ++k) {
                    const bool face = t_face || i == 0 || i == n[0] - 1 || j == 0 ||
                                      j == n[1] - 1 || k == 0 || k == n[2] - 1;
                    if (face) m = std::max(m, std::abs(at(it, i, j, k)));
                }
    }
    return m;
}

ScalarField ScalarField::sample(const GridSpec& g,
                                const std::function<double(double, double, double, double)>& f) {
    ScalarField out(g);
    for (int it = 0; it < g.n_time; ++it)
        for (int i = 0; i < g.n_space[0]; ++i)
            for (int j = 0; j < g.n_space[1]; ++j)
                for (int k = 0; k < g.n_space[2]; ++k)
                    out.at(it, i, j, k) =
                        f(g.time(it), g.coord(0, i), g.coord(1, j), g.coord(2, k));
    return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    if (!(grid == o.grid)) throw std::invalid_argument("field: grid mismatch");
    for (size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    if (!(grid == o.grid)) throw std::invalid_argument("field: grid mismatch");
    for (size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values) v *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("field: grid mismatch");
    ScalarField out(a.grid);
    for (size_t i = 0; i < out.values.size(); ++i) out.values[i] = a.values[i] * b.values[i];
    return out;
}

void write_field(const ScalarField& f, const std::string& path, const std::string& name) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os.write(kMagic, 4);
    auto put_u32 = [&os](std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); };
    auto put_f64 = [&os](double v) { os.write(reinterpret_cast<const char*>(&v), 8); };
    put_u32(kVersion);
    put_u32(static_cast<std::uint32_t>(f.grid.n_time));
    for (int a = 0; a < 3; ++a) put_u32(static_cast<std::uint32_t>(f.grid.n_space[a]));
    for (int a = 0; a < 3; ++a) put_f64(f.grid.origin[a]);
    for (int a = 0; a < 3; ++a) put_f64(f.grid.extent[a]);
    put_f64(f.grid.time_horizon);
    put_f64(f.grid.dt());
    for (int a = 0; a < 3; ++a) put_f64(f.grid.dx(a));
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!os) throw std::runtime_error("write failed: " + path);
    os.close();

    nlohmann::json j;
    j["name"] = name;
    j["format"] = "nsrf-v1";
    j["n_time"] = f.grid.n_time;
    j["n_space"] = f.grid.n_space;
    j["origin"] = f.grid.origin;
    j["extent"] = f.grid.extent;
    j["time_horizon"] = f.grid.time_horizon;
    j["dt"] = f.grid.dt();
    j["dx"] = {f.grid.dx(0), f.grid.dx(1), f.grid.dx(2)};
    j["order"] = "t-major, then x1, x2, x3";
    std::ofstream js(path + ".json");
    if (!js) throw std::runtime_error("cannot open for writing: " + path + ".json");
    js << j.dump(2) << "\n";
}

ScalarField read_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open: " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw std::runtime_error("not a field file: " + path);
    auto get_u32 = [&is] {
        std::uint32_t v = 0;
        is.read(reinterpret_cast<char*>(&v), 4);
        return v;
    };
    auto get_f64 = [&is] {
        double v = 0;
        is.read(reinterpret_cast<char*>(&v), 8);
        return v;
    };
    const std::uint32_t version = get_u32();
    if (version != kVersion) throw std::runtime_error("unsupported field version");
    GridSpec g;
    g.n_time = static_cast<int>(get_u32());
    for (int a = 0; a < 3; ++a) g.n_space[a] = static_cast<int>(get_u32());
    for (int a = 0; a < 3; ++a) g.origin[a] = get_f64();
    for (int a = 0; a < 3; ++a) g.extent[a] = get_f64();
    g.time_horizon = get_f64();
    get_f64();                              // dt, derivable
    for (int a = 0; a < 3; ++a) get_f64();  // dx, derivable
    ScalarField f(g);
    is.read(reinterpret_cast<char*>(f.values.data()),
            static_cast<std::streamsize>(f.values.size() * sizeof(double)));
    if (!is) throw std::runtime_error("truncated field file: " + path);
    return f;
}

}  // namespace nsreduce
