#include "nsreduce/constraint_system.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>

namespace nsreduce {

namespace {

SystemRow ma(int k) { return {k, 0, -1}; }
SystemRow e(int i) { return {0, i, 1}; }

// Row tables of the first-order system, transcribed once. The unit test
// suite re-derives every row from the layout's derivative names and the
// mixed-partial identities, so a transcription slip fails loudly.
const SystemRowTable kH = {ma(1), ma(2), ma(3), ma(4), e(1), e(2), e(3), e(4),
                           e(5),  e(6),  e(7),  e(8),  e(9), e(10), e(11), e(16)};
const SystemRowTable kH0 = {e(21), e(17), e(27), e(37), e(22), e(23), ma(2), e(31),
                            e(32), e(33), ma(3), e(41), e(42), e(43), ma(4), e(12)};
const SystemRowTable kH1 = {e(18), e(21), e(31), e(41), e(24), e(25), ma(1), e(28),
                            e(34), e(35), e(4),  e(38), e(44), e(45), e(8),  e(13)};
const SystemRowTable kH2 = {e(24), e(22), e(32), e(42), e(19), e(26), e(1), e(34),
                            e(29), e(36), e(5),  e(44), e(39), e(46), e(9), e(14)};
const SystemRowTable kH3 = {e(25), e(23), e(33), e(43), e(26), e(20), e(2),  e(35),
                            e(36), e(30), e(6),  e(45), e(46), e(40), e(10), e(15)};

constexpr double kRankTolerance = 1e-10;

Eigen::MatrixXd rows_to_matrix(const SystemRowTable& rows, const ConstraintMatrices& m) {
    Eigen::MatrixXd out(StateLayout::system_rows, StateLayout::z_dim);
    for (int r = 0; r < StateLayout::system_rows; ++r) out.row(r) = m.row_vector(rows[r]);
    return out;
}

void append_triplets(nlohmann::json& arr, const std::string& name, const Eigen::MatrixXd& m) {
    nlohmann::json entry;
    entry["name"] = name;
    entry["rows"] = m.rows();
    entry["cols"] = m.cols();
    nlohmann::json trips = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) trips.push_back({i, j, m(i, j)});
    entry["nonzeros"] = std::move(trips);
    arr.push_back(std::move(entry));
}

}  // namespace

Eigen::VectorXd ConstraintMatrices::row_vector(const SystemRow& row) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(StateLayout::z_dim);
    if (row.alpha > 0)
        v = static_cast<double>(row.sign) * alpha[row.alpha - 1];
    else
        v[row.unit - 1] = static_cast<double>(row.sign);
    return v;
}

Eigen::VectorXd ConstraintMatrices::X0(const Eigen::Vector3d& forcing) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(StateLayout::x_dim);
    x[1] = forcing[0];
    x[2] = forcing[1];
    x[3] = forcing[2];
    return x;
}

Eigen::VectorXd ConstraintMatrices::h_template(const Eigen::Vector3d& forcing) const {
    const auto& layout = StateLayout::instance();
    Eigen::VectorXd h = Eigen::VectorXd::Zero(StateLayout::system_rows);
    const auto& names = layout.system_row_names();
    for (int j = 0; j < 3; ++j) {
        const std::string target = first_derivative_name("u" + std::to_string(j + 1), 0);
        for (int r = 0; r < StateLayout::system_rows; ++r)
            if (names[r] == target) h[r] = forcing[j];
    }
    return h;
}

Eigen::VectorXd ConstraintMatrices::h0_template(const Eigen::Vector3d& forcing) const {
    const auto& layout = StateLayout::instance();
    Eigen::VectorXd h0 = Eigen::VectorXd::Zero(StateLayout::system_rows);
    const auto& names = layout.system_row_names();
    for (int j = 0; j < 3; ++j) {
        // Time-differentiating the row that carries u_j exposes F_j.
        for (int r = 0; r < StateLayout::system_rows; ++r)
            if (names[r] == "u" + std::to_string(j + 1)) h0[r] = forcing[j];
    }
    return h0;
}

ConstraintMatrices build_system(double mu, double tau) {
    if (!(mu > 0.0)) throw std::invalid_argument("build_system: mu must be positive");
    if (!(tau > 0.0)) throw std::invalid_argument("build_system: tau must be positive");

    const auto& layout = StateLayout::instance();
    ConstraintMatrices m;
    m.mu = mu;
    m.tau = tau;

    auto zero = [] { return Eigen::VectorXd::Zero(StateLayout::z_dim); };
    const std::array<std::string, 3> vel = {"u1", "u2", "u3"};

    // Continuity row coefficients.
    m.alpha[0] = zero();
    m.alpha[0][layout.z_slot(first_derivative_name("u2", 2))] = 1.0;
    m.alpha[0][layout.z_slot(first_derivative_name("u3", 3))] = 1.0;

    // Momentum rows: tau * pressure gradient, -mu * velocity Laplacian,
    // unit advective products.
    for (int j = 1; j <= 3; ++j) {
        Eigen::VectorXd v = zero();
        v[layout.z_slot(first_derivative_name("p", j))] = tau;
        for (int ax = 1; ax <= 3; ++ax)
            v[layout.z_slot(second_derivative_name(vel[j - 1], ax, ax))] = -mu;
        for (int k = 1; k <= 3; ++k)
            v[layout.z_slot(vel[k - 1] + "*" + first_derivative_name(vel[j - 1], k))] = 1.0;
        m.alpha[j] = std::move(v);
    }

    m.A1.resize(4, StateLayout::z_dim);
    for (int r = 0; r < 4; ++r) m.A1.row(r) = m.alpha[r];

    m.A.resize(4, StateLayout::x_dim);
    m.A << Eigen::MatrixXd::Identity(4, 4), m.A1;

    m.Aeta.resize(StateLayout::x_dim, StateLayout::z_dim);
    m.Aeta << -m.A1, Eigen::MatrixXd::Identity(StateLayout::z_dim, StateLayout::z_dim);

    m.H_rows = kH;
    m.Hk_rows = {kH0, kH1, kH2, kH3};
    m.H = rows_to_matrix(kH, m);
    for (int k = 0; k < 4; ++k) m.Hk[k] = rows_to_matrix(m.Hk_rows[k], m);
    return m;
}

int numerical_rank(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv[0] == 0.0) return 0;
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > kRankTolerance * sv[0]) ++rank;
    return rank;
}

bool pointwise_solvable(const Eigen::MatrixXd& A, const Eigen::VectorXd& beta) {
    Eigen::MatrixXd aug(A.rows(), A.cols() + 1);
    aug << A, beta;
    return numerical_rank(aug) == numerical_rank(A);
}

Eigen::VectorXd quadratic_residual(const Eigen::VectorXd& z, const StateLayout& layout) {
    Eigen::VectorXd r(StateLayout::num_quadratic);
    const auto& pairs = layout.quad_pairs();
    for (int j = 0; j < StateLayout::num_quadratic; ++j)
        r[j] = z[pairs[j].lhs] - (pairs[j].left.dot(z)) * (pairs[j].right.dot(z));
    return r;
}

Eigen::VectorXd reconstruct_X(const Eigen::VectorXd& z, const Eigen::Vector3d& forcing,
                              const ConstraintMatrices& mats) {
    return mats.X0(forcing) + mats.Aeta * z;
}

std::string structure_json(const ConstraintMatrices& mats) {
    const auto& layout = StateLayout::instance();
    nlohmann::json j;
    j["x_names"] = layout.x_names();
    j["z_names"] = layout.z_names();
    j["mu"] = mats.mu;
    j["tau"] = mats.tau;
    nlohmann::json quads = nlohmann::json::array();
    for (const auto& qp : layout.quad_pairs()) {
        nlohmann::json q;
        q["lhs"] = qp.lhs;
        nlohmann::json left = nlohmann::json::array(), right = nlohmann::json::array();
        for (int i = 0; i < StateLayout::z_dim; ++i) {
            if (qp.left[i] != 0.0) left.push_back({i, qp.left[i]});
            if (qp.right[i] != 0.0) right.push_back({i, qp.right[i]});
        }
        q["left"] = std::move(left);
        q["right"] = std::move(right);
        quads.push_back(std::move(q));
    }
    j["quad_pairs"] = std::move(quads);

    nlohmann::json mats_json = nlohmann::json::array();
    append_triplets(mats_json, "A", mats.A);
    append_triplets(mats_json, "Aeta", mats.Aeta);
    append_triplets(mats_json, "H", mats.H);
    for (int k = 0; k < 4; ++k)
        append_triplets(mats_json, "H" + std::to_string(k), mats.Hk[k]);
    j["matrices"] = std::move(mats_json);
    return j.dump(2);
}

}  // namespace nsreduce
