// Times the OpenMP kernels against the serial reference implementation
// and verifies the two produce identical reports. Wall-clock only; run on
// an otherwise idle machine for stable numbers.
#include <chrono>
#include <cstdio>
#include <string>

#include "reid/harness.hpp"
#include "reid/parallel.hpp"
#include "reid/topics.hpp"

namespace {

using reid::Exec;
using Clock = std::chrono::steady_clock;

template <class F>
double time_seconds(F&& work) {
  auto start = Clock::now();
  work();
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Row {
  std::string name;
  double serial_s = 0, parallel_s = 0;
  bool identical = true;
};

void print_rows(const Row* rows, std::size_t count) {
  std::printf("%-28s %10s %10s %8s %10s\n", "kernel", "serial", "parallel",
              "speedup", "identical");
  for (std::size_t i = 0; i < count; ++i) {
    const Row& r = rows[i];
    std::printf("%-28s %9.3fs %9.3fs %7.2fx %10s\n", r.name.c_str(), r.serial_s,
                r.parallel_s, r.serial_s / r.parallel_s,
                r.identical ? "yes" : "no");
  }
}

}  // namespace

int main(int argc, char** argv) {
  std::size_t users = 20000;
  std::uint64_t trials = 2000;
  if (argc > 1) users = std::stoull(argv[1]);
  if (argc > 2) trials = std::stoull(argv[2]);

  reid::harness::SimulationConfig config;
  config.topics.epochs = 8;
  config.users = users;
  config.seed = 7;

  std::printf("users=%zu trials=%llu threads=%d\n\n", users,
              static_cast<unsigned long long>(trials), reid::thread_count());

  Row rows[3];

  rows[0].name = "generate_population";
  reid::topics::TopSetTable table_serial, table_parallel;
  rows[0].serial_s = time_seconds([&] {
    table_serial = reid::topics::generate_population(
        config.users, config.topics, config.population, config.seed, Exec::serial);
  });
  rows[0].parallel_s = time_seconds([&] {
    table_parallel = reid::topics::generate_population(
        config.users, config.topics, config.population, config.seed,
        Exec::parallel);
  });
  rows[0].identical =
      table_serial.set(users - 1, 7).back() == table_parallel.set(users - 1, 7).back();

  rows[1].name = "random_user hamming";
  reid::harness::ExperimentReport a, b;
  rows[1].serial_s = time_seconds([&] {
    a = reid::harness::run_random_user_experiment(
        config, reid::harness::AttackMethod::hamming, trials, Exec::serial);
  });
  rows[1].parallel_s = time_seconds([&] {
    b = reid::harness::run_random_user_experiment(
        config, reid::harness::AttackMethod::hamming, trials, Exec::parallel);
  });
  rows[1].identical = a.canonical_text() == b.canonical_text();

  rows[2].name = "random_user weighted";
  rows[2].serial_s = time_seconds([&] {
    a = reid::harness::run_random_user_experiment(
        config, reid::harness::AttackMethod::weighted, trials, Exec::serial);
  });
  rows[2].parallel_s = time_seconds([&] {
    b = reid::harness::run_random_user_experiment(
        config, reid::harness::AttackMethod::weighted, trials, Exec::parallel);
  });
  rows[2].identical = a.canonical_text() == b.canonical_text();

  print_rows(rows, 3);
  return 0;
}
