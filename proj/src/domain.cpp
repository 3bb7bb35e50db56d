#include "cdda/domain.hpp"

#include <sstream>

namespace cdda {

namespace {

void check_range(const Labels& labels, int class_count, const char* what) {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) {
      std::ostringstream os;
      os << what << " label " << labels[i] + 1 << " at position " << i << " outside [1, "
         << class_count << "]";
      throw Error(ErrorKind::InvalidLabel, os.str());
    }
  }
}

}  // namespace

Labels to_zero_based(const std::vector<int>& one_based, int class_count) {
  Labels out(one_based.size());
  for (std::size_t i = 0; i < one_based.size(); ++i) {
    if (one_based[i] < 1 || one_based[i] > class_count) {
      std::ostringstream os;
      os << "label " << one_based[i] << " at position " << i << " outside [1, " << class_count
         << "]";
      throw Error(ErrorKind::InvalidLabel, os.str());
    }
    out[i] = one_based[i] - 1;
  }
  return out;
}

std::vector<int> to_one_based(const Labels& labels) {
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) out[i] = labels[i] + 1;
  return out;
}

FeatureMatrix::FeatureMatrix(Matrix data, Eigen::Index n_source)
    : data_(std::move(data)), n_source_(n_source) {
  if (data_.rows() < 1 || n_source_ < 1 || data_.cols() - n_source_ < 1) {
    std::ostringstream os;
    os << "feature matrix needs m >= 1, n_s >= 1, n_t >= 1 (got m=" << data_.rows()
       << ", n_s=" << n_source_ << ", n_t=" << data_.cols() - n_source_ << ")";
    throw Error(ErrorKind::InvalidDimension, os.str());
  }
  if (!data_.allFinite()) {
    throw Error(ErrorKind::InvalidInput, "feature matrix has non-finite entries");
  }
}

FeatureMatrix FeatureMatrix::stack(const Matrix& source, const Matrix& target) {
  if (source.rows() != target.rows()) {
    throw Error(ErrorKind::InvalidDimension, "source and target feature dimensions differ");
  }
  Matrix x(source.rows(), source.cols() + target.cols());
  x << source, target;
  return FeatureMatrix(std::move(x), source.cols());
}

LabelState::LabelState(Labels source_labels, std::optional<Labels> target, int classes)
    : source(std::move(source_labels)), target_pseudo(std::move(target)), class_count(classes) {
  if (class_count < 2) {
    throw Error(ErrorKind::InvalidInput, "class count must be at least 2");
  }
  check_range(source, class_count, "source");
  if (target_pseudo) check_range(*target_pseudo, class_count, "target");
}

SubdomainIndex::SubdomainIndex(const LabelState& labels)
    : n_source_(static_cast<Eigen::Index>(labels.source.size())),
      n_target_(0),
      source_(static_cast<std::size_t>(labels.class_count)),
      target_(static_cast<std::size_t>(labels.class_count)) {
  if (!labels.target_pseudo) {
    throw Error(ErrorKind::InvalidState, "sub-domain index needs target pseudo-labels");
  }
  // LabelState fields are public; re-check the range here.
  check_range(labels.source, labels.class_count, "source");
  check_range(*labels.target_pseudo, labels.class_count, "target");
  const Labels& tgt = *labels.target_pseudo;
  n_target_ = static_cast<Eigen::Index>(tgt.size());
  for (std::size_t i = 0; i < labels.source.size(); ++i) {
    source_[static_cast<std::size_t>(labels.source[i])].push_back(static_cast<Eigen::Index>(i));
  }
  for (std::size_t j = 0; j < tgt.size(); ++j) {
    target_[static_cast<std::size_t>(tgt[j])].push_back(n_source_ + static_cast<Eigen::Index>(j));
  }
}

}  // namespace cdda
