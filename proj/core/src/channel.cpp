#include "chaoscomm/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "chaoscomm/rng.hpp"

namespace chaoscomm {

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * rng_.next_unit() - 1.0;
        v = 2.0 * rng_.next_unit() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

double bit_energy(int m_subcarriers, double e_data, double e_ref) {
    if (m_subcarriers < 2) throw std::invalid_argument("M must be >= 2");
    if (e_data < 0.0 || e_ref < 0.0) throw std::invalid_argument("energies must be >= 0");
    return e_data + e_ref / (m_subcarriers - 1);
}

double dbr(int m_subcarriers) {
    if (m_subcarriers < 2) throw std::invalid_argument("M must be >= 2");
    return static_cast<double>(m_subcarriers - 1) / m_subcarriers;
}

EnergyReport energy_report(int m_subcarriers, double e_data, double e_ref) {
    EnergyReport r;
    r.e_data = e_data;
    r.e_ref = e_ref;
    r.e_bit = bit_energy(m_subcarriers, e_data, e_ref);
    r.dbr = (r.e_bit > 0.0) ? e_data / r.e_bit : 0.0;
    return r;
}

EnergyReport energy_report_from_frame(const ChipFrame& frame) {
    if (frame.rows < 2) throw std::invalid_argument("frame must have a reference and data rows");
    auto branch_energy = [&](int i) {
        double acc = 0.0;
        for (double x : frame.row(i)) acc += x * x;
        return acc;
    };
    // Data rows are +/- the reference, so all carry the same energy; row 1
    // stands for all of them.
    return energy_report(frame.rows, branch_energy(1), branch_energy(0));
}

NoiseSpec calibrate_noise(double ebn0_db, double e_bit) {
    if (e_bit <= 0.0) throw std::invalid_argument("e_bit must be > 0");
    NoiseSpec spec;
    if (std::isinf(ebn0_db) && ebn0_db > 0) {
        spec.n0 = 0.0;
    } else {
        spec.n0 = e_bit / std::pow(10.0, ebn0_db / 10.0);
    }
    return spec;
}

void add_awgn_inplace(std::span<double> signal, const NoiseSpec& spec) {
    if (spec.n0 < 0.0) throw std::invalid_argument("n0 must be >= 0");
    if (spec.n0 == 0.0) return;
    const double sigma = std::sqrt(spec.n0 / 2.0);
    GaussianStream g(spec.rng_stream);
    for (double& x : signal) x += sigma * g.next();
}

std::vector<double> apply_awgn(std::span<const double> signal, const NoiseSpec& spec) {
    std::vector<double> out(signal.begin(), signal.end());
    add_awgn_inplace(out, spec);
    return out;
}

}  // namespace chaoscomm
