// Serial reference vs OpenMP for the two parallel kernels: the costate-grid sweep
// and multistart shooting. Outputs must agree exactly; only the timing differs.
//
//   bench_kernels [pmax] [step] [workers]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include <omp.h>

#include "tacnog/dataset.hpp"
#include "tacnog/shooting.hpp"

using namespace tacnog;

namespace {

template <class F>
double seconds(F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    SweepConfig cfg;
    cfg.p_max = argc > 1 ? std::atof(argv[1]) : 4.0;
    cfg.step_q = argc > 2 ? std::atof(argv[2]) : 0.5;
    const int workers = argc > 3 ? std::atoi(argv[3]) : omp_get_max_threads();

    std::vector<DatasetRecord> serial;
    std::vector<DatasetRecord> parallel;
    SweepStats s1;
    SweepStats s2;
    const double ts = seconds([&] { s1 = generate_dataset_serial(cfg, [&](const DatasetRecord& r) { serial.push_back(r); }); });
    const double tp =
        seconds([&] { s2 = generate_dataset(cfg, [&](const DatasetRecord& r) { parallel.push_back(r); }, workers); });
    const bool same = s1 == s2 && serial == parallel;
    std::printf("sweep       grid %zu  accepted %zu  serial %.3f s  omp(%d) %.3f s  speedup %.2f  identical %s\n",
                s1.total, s1.accepted, ts, workers, tp, ts / tp, same ? "yes" : "NO");

    ShootingProblem prob;
    prob.z0 = EngagementState::make(0.4748, 1.5968, 237.4 * kPi / 180.0);
    prob.horizon = 2.7;
    MultistartOptions mo;
    mo.q_spacing = 4.0;
    std::vector<ShootingResult> r1;
    std::vector<ShootingResult> r2;
    mo.workers = 1;
    const double ms = seconds([&] { r1 = multistart(prob, mo); });
    mo.workers = workers;
    const double mp = seconds([&] { r2 = multistart(prob, mo); });
    bool roots_same = r1.size() == r2.size();
    for (std::size_t k = 0; roots_same && k < r1.size(); ++k) roots_same = r1[k].q == r2[k].q;
    std::printf("multistart  roots %zu  serial %.3f s  omp(%d) %.3f s  speedup %.2f  identical %s\n", r1.size(), ms,
                workers, mp, ms / mp, roots_same ? "yes" : "NO");
    return same && roots_same ? 0 : 1;
}
