#pragma once

#include <memory>
#include <string>

#include "mollescore/dataset.hpp"
#include "mollescore/mollify.hpp"
#include "mollescore/spectral.hpp"

namespace mollescore {

// Identifies where an evaluation sits inside a sampling loop so the
// mollified backend can derive fresh-but-reproducible noise per step and
// trajectory. Plain callers use the defaults.
struct EvalContext {
  std::uint64_t step_index = 0;
  const int* trajectory_ids = nullptr;  // per query row; row index if null
};

class ScoreField {
 public:
  virtual ~ScoreField() = default;
  virtual std::string label() const = 0;
  virtual int dim() const = 0;
  virtual Vector score(double t, const Vector& x) const;
  virtual double divergence(double t, const Vector& x) const;
  // Fused batch evaluation; rows of `queries` are independent points.
  virtual void eval_batch(double t, const Matrix& queries, Matrix* score_out,
                          Vector* div_out, const EvalContext& ctx) const = 0;
};

class EmpiricalField : public ScoreField {
 public:
  explicit EmpiricalField(Dataset ds);
  std::string label() const override;
  int dim() const override { return ds_.dim(); }
  void eval_batch(double t, const Matrix& queries, Matrix* score_out,
                  Vector* div_out, const EvalContext& ctx) const override;
  const Dataset& dataset() const { return ds_; }

 private:
  Dataset ds_;
};

class MollifiedField : public ScoreField {
 public:
  MollifiedField(Dataset ds, MollifySpec spec, std::uint64_t seed);
  std::string label() const override;
  int dim() const override { return ds_.dim(); }
  void eval_batch(double t, const Matrix& queries, Matrix* score_out,
                  Vector* div_out, const EvalContext& ctx) const override;
  const Dataset& dataset() const { return ds_; }
  const MollifySpec& spec() const { return spec_; }

 private:
  Dataset ds_;
  MollifySpec spec_;
  std::uint64_t seed_;
};

// Closed-form score of an analytic target (capability-gated).
class AnalyticField : public ScoreField {
 public:
  explicit AnalyticField(TargetSpec spec);
  std::string label() const override;
  int dim() const override { return spec_.ambient_dim(); }
  void eval_batch(double t, const Matrix& queries, Matrix* score_out,
                  Vector* div_out, const EvalContext& ctx) const override;

 private:
  TargetSpec spec_;
};

// Cosine-eigenbasis score on the cube (verification backend, d <= 3).
class SpectralScoreField : public ScoreField {
 public:
  SpectralScoreField(SpectralCoeffs coeffs, double h = 0.0);
  std::string label() const override;
  int dim() const override;
  void eval_batch(double t, const Matrix& queries, Matrix* score_out,
                  Vector* div_out, const EvalContext& ctx) const override;

 private:
  SpectralCoeffs coeffs_;
  double h_;
};

}  // namespace mollescore
