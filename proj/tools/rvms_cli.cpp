#include <charconv>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rvms/bench.hpp"
#include "rvms/core.hpp"
#include "rvms/multiway.hpp"
#include "rvms/networks.hpp"
#include "rvms/parallel.hpp"

namespace {

using namespace rvms;

constexpr int kExitVerifyFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitWriteFailure = 3;

// Data files are raw little-endian 32-bit signed integers, assembled and
// emitted byte by byte so the format holds on any host.
std::optional<std::vector<Element>> read_values(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad() || bytes.size() % 4 != 0) return std::nullopt;

  std::vector<Element> values(bytes.size() / 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint32_t word = 0;
    for (std::size_t k = 0; k < 4; ++k)
      word |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[4 * i + k])) << (8 * k);
    values[i] = static_cast<Element>(word);
  }
  return values;
}

bool write_values(const std::string& path, std::span<const Element> values) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) return false;
  std::vector<char> bytes(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint32_t word = static_cast<std::uint32_t>(values[i]);
    for (std::size_t k = 0; k < 4; ++k)
      bytes[4 * i + k] = static_cast<char>((word >> (8 * k)) & 0xff);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  return out.good();
}

AsymVariant to_variant(const std::string& name) {
  if (name == "v2") return AsymVariant::iterative;
  if (name == "v3") return AsymVariant::parallel;
  return AsymVariant::standard;
}

int parse_width(const std::string& digits) {
  int width = 0;
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), width);
  if (ec != std::errc() || ptr != digits.data() + digits.size())
    throw std::invalid_argument("bad width suffix: " + digits);
  return width;
}

ComparatorNetwork make_network(const std::string& name, int lane_width) {
  if (name == "sorter16") return gen_column_sorter(static_cast<int>(kRegisterRows), lane_width);
  if (name == "asym-v1") return gen_asym_merge_8_24(AsymVariant::standard, lane_width);
  if (name == "asym-v2") return gen_asym_merge_8_24(AsymVariant::iterative, lane_width);
  if (name == "asym-v3") return gen_asym_merge_8_24(AsymVariant::parallel, lane_width);
  if (name.starts_with("oddeven")) return gen_oddeven_merge(parse_width(name.substr(7)), lane_width);
  if (name.starts_with("bitonic")) return gen_bitonic_merge(parse_width(name.substr(7)), lane_width);
  throw std::invalid_argument("unknown network: " + name);
}

int run_gen(const std::string& path, std::size_t size, std::uint64_t seed) {
  const std::vector<Element> data = generate_dataset(size, seed);
  if (!write_values(path, data)) {
    std::cerr << "error: cannot write " << path << '\n';
    return kExitWriteFailure;
  }
  return 0;
}

int run_sort(const std::string& input, const std::string& output, const SortConfig& config) {
  std::optional<std::vector<Element>> data = read_values(input);
  if (!data) {
    std::cerr << "error: cannot read " << input << " (missing, or not whole 32-bit words)\n";
    return kExitUsage;
  }
  parallel_sort(*data, config);
  if (!write_values(output, *data)) {
    std::cerr << "error: cannot write " << output << '\n';
    return kExitWriteFailure;
  }
  return 0;
}

int run_bench(const std::vector<std::size_t>& sizes, const std::vector<std::string>& kernels,
              const std::vector<std::uint64_t>& seeds, const SortConfig& config,
              const std::string& csv_path) {
  for (const std::string& kernel : kernels) {
    if (!is_known_kernel(kernel)) {
      std::cerr << "error: unknown kernel: " << kernel << " (known:";
      for (const std::string& name : kernel_names()) std::cerr << ' ' << name;
      std::cerr << ")\n";
      return kExitUsage;
    }
  }

  std::ofstream file;
  std::ostream* out = &std::cout;
  if (!csv_path.empty()) {
    file.open(csv_path, std::ios::trunc);
    if (!file) {
      std::cerr << "error: cannot write " << csv_path << '\n';
      return kExitWriteFailure;
    }
    out = &file;
  }

  write_csv_header(*out);
  for (const std::size_t size : sizes) {
    for (const std::string& kernel : kernels) {
      for (const std::uint64_t seed : seeds) {
        write_csv_row(*out, run_benchmark(kernel, size, seed, config));
        out->flush();
      }
    }
  }
  if (!out->good()) {
    std::cerr << "error: write failure on benchmark output\n";
    return kExitWriteFailure;
  }
  return 0;
}

int run_verify() {
  struct Check {
    std::string name;
    bool ok;
  };
  std::vector<Check> checks;
  checks.push_back({"sorter16", verify_network(gen_column_sorter(), NetworkRole::sorter)});
  for (const int width : {4, 8, 16, 32}) {
    checks.push_back({"oddeven" + std::to_string(width),
                      verify_merger(gen_oddeven_merge(width), width / 2)});
    checks.push_back({"bitonic" + std::to_string(width),
                      verify_merger(gen_bitonic_merge(width), width / 2)});
  }
  for (const auto& [suffix, variant] :
       {std::pair{"v1", AsymVariant::standard}, std::pair{"v2", AsymVariant::iterative},
        std::pair{"v3", AsymVariant::parallel}}) {
    checks.push_back(
        {std::string("asym-") + suffix, verify_merger(gen_asym_merge_8_24(variant), 8)});
  }

  std::size_t failures = 0;
  for (const Check& check : checks) {
    std::cout << check.name;
    for (std::size_t pad = check.name.size(); pad < 12; ++pad) std::cout << ' ';
    std::cout << (check.ok ? "ok" : "FAIL") << '\n';
    if (!check.ok) ++failures;
  }
  std::cout << checks.size() << " networks, " << failures << " failures\n";
  return failures == 0 ? 0 : kExitVerifyFailure;
}

int run_dump(const std::string& name, int lane_width) {
  ComparatorNetwork net{};
  try {
    net = make_network(name, lane_width);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what()
              << " (known: sorter16, oddeven<N>, bitonic<N> for N in {4,8,16,32,64}, "
                 "asym-v1, asym-v2, asym-v3)\n";
    return kExitUsage;
  }
  std::cout << dump_network(net);
  const CostReport cost = cost_report(net, lane_width);
  std::cout << "comparators=" << cost.comparators << " stages=" << cost.stages
            << " intra_exchanges=" << cost.intra_exchanges << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vectorized merge sort toolkit: dataset generation, sorting, benchmarks,\n"
               "network verification, and network dumps."};
  app.require_subcommand(1);

  std::size_t size = 1 << 20;
  std::vector<std::size_t> sizes;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;
  std::size_t threads = 1;
  std::size_t block_elements = kCacheBlockElements;
  std::string variant = "v1";
  std::vector<std::string> kernels;
  std::string csv_path;
  std::string input_path;
  std::string output_path;
  std::string network_name;
  int lane_width = static_cast<int>(kLaneWidth);

  CLI::App* gen = app.add_subcommand("gen", "Write a reproducible random dataset");
  gen->add_option("output", output_path, "Output file")->required();
  gen->add_option("--size", size, "Element count")->check(CLI::NonNegativeNumber);
  gen->add_option("--seed", seed, "PRNG seed (std::mt19937_64, low 32 bits per draw)");

  CLI::App* sort = app.add_subcommand("sort", "Sort a data file");
  sort->add_option("input", input_path, "Input file")->required();
  sort->add_option("output", output_path, "Output file")->required();
  sort->add_option("--threads", threads, "Worker threads (flag beats RVMS_THREADS)")
      ->envname("RVMS_THREADS")
      ->check(CLI::PositiveNumber);
  sort->add_option("--variant", variant, "Asymmetric merge variant")
      ->check(CLI::IsMember({"v1", "v2", "v3"}));
  sort->add_option("--block-size", block_elements, "In-cache block length, elements")
      ->check(CLI::PositiveNumber);

  CLI::App* bench = app.add_subcommand(
      "bench",
      "Time sorting kernels; emits CSV rows with the columns\n"
      "kernel,size,threads,seed,time_ns,elems_per_us,in_thread_pct,out_thread_pct.\n"
      "Every timed result is first verified against the input multiset.");
  bench->add_option("--size", sizes, "Element counts")
      ->required()
      ->check(CLI::PositiveNumber);
  bench->add_option("--kernel", kernels, "Kernels to run (default: all registered)");
  bench->add_option("--seed", seeds, "PRNG seeds (default: 1)");
  bench->add_option("--threads", threads, "Worker threads (flag beats RVMS_THREADS)")
      ->envname("RVMS_THREADS")
      ->check(CLI::PositiveNumber);
  bench->add_option("--csv", csv_path, "Write rows to this file instead of stdout");
  bench->add_option("--variant", variant, "Asymmetric merge variant")
      ->check(CLI::IsMember({"v1", "v2", "v3"}));
  bench->add_option("--block-size", block_elements, "In-cache block length, elements")
      ->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "Re-verify every sorting and merging network");

  CLI::App* dump = app.add_subcommand("dump", "Print a network's stages and exchange cost");
  dump->add_option("network", network_name, "Network name, e.g. oddeven16")->required();
  dump->add_option("--lane-width", lane_width, "Lanes per register for the cost model")
      ->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    SortConfig config;
    config.threads = threads;
    config.block_elements = block_elements;
    config.variant = to_variant(variant);

    if (*gen) return run_gen(output_path, size, seed);
    if (*sort) return run_sort(input_path, output_path, config);
    if (*bench) {
      if (kernels.empty()) kernels = kernel_names();
      if (seeds.empty()) seeds.push_back(1);
      return run_bench(sizes, kernels, seeds, config, csv_path);
    }
    if (*verify) return run_verify();
    if (*dump) return run_dump(network_name, lane_width);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
