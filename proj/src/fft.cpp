#include "fft.hpp"

#include <fftw3.h>

#include <functional>
#include <mutex>
#include <numeric>

namespace varq::detail {

namespace {
std::mutex planner_mutex;
}

void inverse_dft(std::complex<double>* data, const std::vector<int>& shape, std::size_t howmany) {
  if (howmany == 0 || shape.empty()) return;
  const int dist = std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<>());
  auto* buf = reinterpret_cast<fftw_complex*>(data);
  fftw_plan plan;
  {
    // The FFTW planner is not thread safe; execution is.
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_many_dft(static_cast<int>(shape.size()), shape.data(), static_cast<int>(howmany), buf, nullptr,
                              1, dist, buf, nullptr, 1, dist, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  fftw_execute(plan);
  std::lock_guard lock(planner_mutex);
  fftw_destroy_plan(plan);
}

}  // namespace varq::detail
