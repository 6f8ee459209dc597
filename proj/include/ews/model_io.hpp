/*
   Copyright 2026 The ews authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ews/classifier.hpp"
#include "ews/errors.hpp"

namespace ews {

inline nlohmann::json classifier_to_json(const Classifier& c) {
    return nlohmann::json{
        {"architecture", c.architecture},
        {"window_length", c.window_length},
        {"class_order", c.class_order},
        {"params", c.params},
        {"feature_mean", c.feat_mean},
        {"feature_std", c.feat_std},
        {"training",
         {
             {"dataset_hash", c.manifest.dataset_hash},
             {"seed", c.manifest.seed},
             {"epochs", c.manifest.epochs},
             {"learning_rate", c.manifest.learning_rate},
             {"n_train", c.manifest.n_train},
             {"n_test", c.manifest.n_test},
             {"n_validation", c.manifest.n_validation},
             {"validation_auc", c.manifest.validation_auc},
             {"validation_accuracy", c.manifest.validation_accuracy},
         }},
    };
}

inline void save_classifier(const Classifier& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    out << classifier_to_json(c).dump(2) << "\n";
}

inline Classifier load_classifier(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw DataError(path.string() + ": invalid JSON (" + e.what() + ")");
    }
    try {
        Classifier c;
        c.architecture = j.at("architecture").get<std::string>();
        c.window_length = j.at("window_length").get<int>();
        c.class_order = j.at("class_order").get<std::array<std::string, 2>>();
        c.params = j.at("params").get<std::vector<double>>();
        c.feat_mean = j.at("feature_mean").get<std::vector<double>>();
        c.feat_std = j.at("feature_std").get<std::vector<double>>();
        const auto& t = j.at("training");
        c.manifest.dataset_hash = t.at("dataset_hash").get<std::uint64_t>();
        c.manifest.seed = t.at("seed").get<std::uint64_t>();
        c.manifest.epochs = t.at("epochs").get<int>();
        c.manifest.learning_rate = t.at("learning_rate").get<double>();
        c.manifest.n_train = t.at("n_train").get<std::size_t>();
        c.manifest.n_test = t.at("n_test").get<std::size_t>();
        c.manifest.n_validation = t.at("n_validation").get<std::size_t>();
        c.manifest.validation_auc = t.at("validation_auc").get<double>();
        c.manifest.validation_accuracy = t.at("validation_accuracy").get<double>();
        require(c.params.size() == kParamCount, "model file has wrong parameter count");
        require(c.feat_mean.size() == kFeatureDim && c.feat_std.size() == kFeatureDim,
                "model file has wrong normalization size");
        return c;
    } catch (const ContractError&) {
        throw;
    } catch (const std::exception& e) {
        throw DataError(path.string() + ": bad model file (" + e.what() + ")");
    }
}

}  // namespace ews
