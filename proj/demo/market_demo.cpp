// Walks one LD test and three LR predictions through both protocols and
// prints who sent what to whom.
#include <iostream>

#include "dmpc/market/inputs.hpp"
#include "dmpc/market/session.hpp"

using namespace dmpc;
using namespace dmpc::market;

namespace {

void show(const char* title, const SessionOutcome& out) {
  std::cout << "== " << title << '\n';
  for (const auto& e : out.transcript.entries())
    std::cout << "  #" << e.seq << "  " << e.from.str() << " -> " << e.to.str() << "  " << to_string(e.type) << "  " << e.bytes << " B\n";
  std::cout << "  result:";
  for (auto v : out.values) std::cout << ' ' << v;
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  const std::string data = argc > 1 ? argv[1] : DMPC_DATA_DIR;
  try {
    // Four makers, each holding one haplotype class of a strongly linked
    // sample (N = 100). Pooled, the chi-square statistic is far above 3.841.
    Computation ld;
    ld.count_bits = 7;
    ld.n_max = 100;
    const std::vector<MakerInput> makers = {{{{30, 0, 0, 0}}, {}}, {{{0, 20, 0, 0}}, {}}, {{{0, 0, 20, 0}}, {}}, {{{0, 0, 0, 30}}, {}}};
    show("LD test, Protocol 1 (homomorphic)", run_protocol1(ld, makers));
    show("LD test, Protocol 2 (garbled circuit)", run_protocol2(ld, makers));
    std::cout << "  plaintext oracle: " << oracle(ld, makers).at(0) << "\n\n";

    Computation lr;
    lr.workload = Workload::Lr;
    lr.instances = 3;
    lr.model = std::make_shared<const analytics::LrModel>(analytics::read_lr_model(data + "/lr_model.txt"));
    const auto samples = analytics::read_lr_samples(data + "/breast_cancer.csv");
    const std::vector<MakerInput> rows{lr_rows(*lr.model, samples, 0, 3)};
    const auto out = run_protocol2(lr, rows, SessionOptions{TransportKind::Tcp, 7, 7, "127.0.0.1"});
    show("LR prediction of rows 0-2, Protocol 2 over TCP", out);
    for (std::size_t i = 0; i < out.values.size(); ++i)
      std::cout << "  row " << i << ": p = " << lr.table_out.decode(out.values[i]) << ", label " << samples.labels.at(i) << '\n';
  } catch (const std::exception& e) {
    std::cerr << "demo failed: " << e.what() << '\n';
    return 1;
  }
}
