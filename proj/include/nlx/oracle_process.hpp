#pragma once

// External black box reached over newline-delimited JSON on the child's
// stdin/stdout. Request {"id": n, "example": {...}}, response {"id": n, "label": "..."}.

#include <cstdint>
#include <mutex>
#include <string>
#include <vector>

#include "nlx/classifier.hpp"

namespace nlx {

class SubprocessClassifier final : public Classifier {
 public:
  // argv[0] is looked up in PATH. Throws Oracle when the process cannot start.
  SubprocessClassifier(std::vector<std::string> argv, FeatureSchema schema);
  ~SubprocessClassifier() override;

  SubprocessClassifier(const SubprocessClassifier&) = delete;
  SubprocessClassifier& operator=(const SubprocessClassifier&) = delete;

  // Throws Oracle on protocol errors or a dead child.
  std::string predict(const Example& ex) const override;
  const FeatureSchema& schema() const override { return schema_; }

  std::uint64_t requests() const;

 private:
  std::string read_line() const;

  FeatureSchema schema_;
  int fd_ = -1;
  int pid_ = -1;
  mutable std::mutex mutex_;
  mutable std::uint64_t next_id_ = 0;
  mutable std::string buffer_;
};

// Runs `command` through /bin/sh -c.
std::vector<std::string> shell_argv(const std::string& command);

}  // namespace nlx
