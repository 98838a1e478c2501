// Copyright 2026 The infotraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "infotraj/gp/io.hpp"

#include <filesystem>

#include "infotraj/csv.hpp"

namespace infotraj::gp {

KeyValue kernel_to_kv(const Kernel& kernel) {
  KeyValue kv;
  kv.set("signal_variance", kernel.signal_variance);
  for (Eigen::Index i = 0; i < kernel.dim(); ++i) {
    kv.set("lengthscale_" + std::to_string(i), kernel.lengthscales(i));
  }
  kv.set("noise_variance", kernel.noise_variance);
  return kv;
}

Kernel kernel_from_kv(const KeyValue& kv) {
  Kernel k;
  k.signal_variance = kv.get_double("signal_variance");
  k.noise_variance = kv.get_double("noise_variance");
  std::vector<double> ell;
  while (kv.has("lengthscale_" + std::to_string(ell.size()))) {
    ell.push_back(kv.get_double("lengthscale_" + std::to_string(ell.size())));
  }
  k.lengthscales = Eigen::Map<const VectorXd>(ell.data(), static_cast<Eigen::Index>(ell.size()));
  k.validate();
  return k;
}

std::string datasets_to_csv(const std::vector<Dataset>& per_channel) {
  Eigen::Index d = 0;
  for (const auto& ds : per_channel) {
    if (ds.size() > 0) d = ds.dim();
  }
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < d; ++j) header.push_back("dim_" + std::to_string(j));
  header.insert(header.end(), {"target", "channel", "trajectory_id"});
  CsvWriter csv(header);
  for (std::size_t c = 0; c < per_channel.size(); ++c) {
    const Dataset& ds = per_channel[c];
    for (Eigen::Index i = 0; i < ds.size(); ++i) {
      for (Eigen::Index j = 0; j < d; ++j) csv.cell(ds.inputs(i, j));
      csv.cell(ds.targets(i));
      csv.cell(static_cast<long long>(c));
      csv.cell(static_cast<long long>(ds.trajectory_ids[static_cast<std::size_t>(i)]));
      csv.end_row();
    }
  }
  return csv.str();
}

std::vector<Dataset> datasets_from_csv(const std::string& text, int channels) {
  const CsvTable table = parse_csv(text);
  const int d = static_cast<int>(table.header.size()) - 3;
  if (d < 0 || table.column("target") != d) throw InputError("dataset csv: bad header");
  std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(channels));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const int c = static_cast<int>(table.number(r, "channel"));
    if (c < 0 || c >= channels) throw InputError("dataset csv: channel out of range");
    rows[static_cast<std::size_t>(c)].push_back(r);
  }
  std::vector<Dataset> out;
  for (int c = 0; c < channels; ++c) {
    const auto& idx = rows[static_cast<std::size_t>(c)];
    MatrixXd x(static_cast<Eigen::Index>(idx.size()), d);
    VectorXd y(static_cast<Eigen::Index>(idx.size()));
    std::vector<std::int64_t> ids;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      for (int j = 0; j < d; ++j) {
        x(static_cast<Eigen::Index>(i), j) = table.number(idx[i], "dim_" + std::to_string(j));
      }
      y(static_cast<Eigen::Index>(i)) = table.number(idx[i], "target");
      ids.push_back(static_cast<std::int64_t>(table.number(idx[i], "trajectory_id")));
    }
    out.emplace_back(std::move(x), std::move(y), std::move(ids));
  }
  return out;
}

void save_model(const ResidualModel& model, const std::string& directory) {
  std::filesystem::create_directories(directory);
  KeyValue meta;
  meta.set("feature_mode", to_string(model.features().mode));
  meta.set("state_dim", model.features().state_dim);
  meta.set("input_dim", model.features().input_dim);
  meta.set("channels", model.num_channels());
  meta.save(directory + "/model.kv");
  for (int c = 0; c < model.num_channels(); ++c) {
    kernel_to_kv(model.channel(c).kernel()).save(directory + "/kernel_" + std::to_string(c) + ".kv");
  }
  write_text(directory + "/dataset.csv", datasets_to_csv(model.datasets()));
}

ResidualModel load_model(const std::string& directory) {
  const KeyValue meta = KeyValue::load(directory + "/model.kv");
  FeatureMap features{parse_feature_mode(meta.get("feature_mode")),
                      static_cast<int>(meta.get_int("state_dim")),
                      static_cast<int>(meta.get_int("input_dim"))};
  const int channels = static_cast<int>(meta.get_int("channels"));
  std::vector<Kernel> kernels;
  for (int c = 0; c < channels; ++c) {
    kernels.push_back(kernel_from_kv(KeyValue::load(directory + "/kernel_" + std::to_string(c) + ".kv")));
  }
  return ResidualModel(features, kernels).condition(datasets_from_csv(read_text(directory + "/dataset.csv"), channels));
}

}  // namespace infotraj::gp
