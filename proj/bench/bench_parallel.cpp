#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "noisycw/averaging.hpp"
#include "noisycw/dynamics.hpp"
#include "noisycw/montecarlo.hpp"

using namespace noisycw;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

bool bitwise_equal(const CorrelationSeries& a, const CorrelationSeries& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a.values[i] != b.values[i] || a.delays[i] != b.delays[i]) return false;
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const int order = argc > 1 ? std::atoi(argv[1]) : 12;
    const int n_traj = argc > 2 ? std::atoi(argv[2]) : 64;

    TwoLevelSystem sys{0.34, 0.5};
    DrivingField field;
    field.rabi_mean = 0.1;
    NoiseSpec noise;
    noise.tau_c = 4.0;
    noise.var_domega = 0.01;
    noise.var_de_rel = 1.0;
    const std::vector<double> grid = uniform_grid(0.0, 10.0, 0.5);

#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    std::printf("threads=%d order=%d n_traj=%d grid=%zu\n", threads, order, n_traj,
                grid.size());

    auto t0 = std::chrono::steady_clock::now();
    const CorrelationSeries quad_serial = averaged_g2_series(
        sys, field, noise, grid, order, ExecPolicy::serial);
    const double ts = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const CorrelationSeries quad_parallel = averaged_g2_series(
        sys, field, noise, grid, order, ExecPolicy::parallel);
    const double tp = seconds_since(t0);
    std::printf("quadrature  serial %8.3f s   parallel %8.3f s   speedup %.2fx   %s\n",
                ts, tp, ts / tp,
                bitwise_equal(quad_serial, quad_parallel) ? "bitwise-identical"
                                                          : "MISMATCH");

    EnsembleConfig cfg;
    cfg.n_traj = n_traj;
    cfg.seed = 7;
    cfg.policy = ExecPolicy::serial;
    t0 = std::chrono::steady_clock::now();
    const McSeries mc_serial = mc_g2(sys, field, noise, grid, cfg);
    const double ms = seconds_since(t0);
    cfg.policy = ExecPolicy::parallel;
    t0 = std::chrono::steady_clock::now();
    const McSeries mc_parallel = mc_g2(sys, field, noise, grid, cfg);
    const double mp = seconds_since(t0);
    std::printf("trajectories serial %8.3f s   parallel %8.3f s   speedup %.2fx   %s\n",
                ms, mp, ms / mp,
                bitwise_equal(mc_serial.series, mc_parallel.series)
                    ? "bitwise-identical"
                    : "MISMATCH");

    const bool ok = bitwise_equal(quad_serial, quad_parallel) &&
                    bitwise_equal(mc_serial.series, mc_parallel.series);
    return ok ? 0 : 1;
}
