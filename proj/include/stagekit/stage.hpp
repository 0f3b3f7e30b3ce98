#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "stagekit/graph.hpp"

namespace stagekit {

class Stage;

// Typed wrappers around staged expressions; the user-facing handle a DSL
// program manipulates in place of a host value.
struct DVal {
  Stage* st{nullptr};
  Expr e{Expr::unit()};

  DVal() = default;
  DVal(Stage* s, Expr x) : st(s), e(std::move(x)) {}
  const SemType& ty() const { return e.ty; }
};

struct DInt : DVal {
  using DVal::DVal;
  explicit DInt(const DVal& v);
};
struct DDouble : DVal {
  using DVal::DVal;
  explicit DDouble(const DVal& v);
};
struct DBool : DVal {
  using DVal::DVal;
  explicit DBool(const DVal& v);
};
struct DStr : DVal {
  using DVal::DVal;
};
struct DUnit : DVal {
  using DVal::DVal;
};
struct DRec : DVal {
  using DVal::DVal;
  explicit DRec(const DVal& v);
  DVal field(const std::string& name) const;
  DDouble field_d(const std::string& name) const;
};

struct DVec : DVal {
  using DVal::DVal;
  explicit DVec(const DVal& v);

  DInt len() const;
  DVal at(DInt i) const;
  DDouble at_d(DInt i) const;
  DInt at_i(DInt i) const;
  void update(DInt i, DVal x) const;

  DVec map(const std::function<DVal(DVal)>& f) const;
  DVec zip_with(DVec other, const std::function<DVal(DVal, DVal)>& f) const;
  DVal sum() const;
  DDouble avg() const;
  DInt count_where(const std::function<DBool(DVal)>& pred) const;
  DVec find_indexes(const std::function<DBool(DVal)>& pred) const;
};

// A staged mutable variable.
struct VarHandle {
  Stage* st{nullptr};
  Expr e{Expr::unit()};

  DVal read() const;
  DInt read_i() const { return DInt(read()); }
  DDouble read_d() const { return DDouble(read()); }
  void write(DVal x) const;
};

enum class NormTier { Library, Match, Node };

struct StageOptions {
  bool cse{true};
  bool fast_math{false};
  NormTier tier{NormTier::Library};
  int bam_budget{64};
};

// Ordered rewrite hooks per node family, consulted newest-first; the first
// hook producing an expression wins, otherwise staging falls through to the
// default constructor.
class RewriteRegistry {
public:
  using Hook = std::function<std::optional<Expr>(Stage&, const Node&)>;

  void add(const std::string& family, Hook h) {
    hooks_[family].push_back(std::move(h));
  }
  std::optional<Expr> apply(Stage& st, const std::string& family,
                            const Node& d) const {
    auto it = hooks_.find(family);
    if (it == hooks_.end()) return std::nullopt;
    for (auto h = it->second.rbegin(); h != it->second.rend(); ++h) {
      if (auto r = (*h)(st, d)) return r;
    }
    return std::nullopt;
  }
  size_t count(const std::string& family) const {
    auto it = hooks_.find(family);
    return it == hooks_.end() ? 0 : it->second.size();
  }

private:
  std::unordered_map<std::string, std::vector<Hook>> hooks_;
};

// Staging context: owns the graph under construction, the rewrite registry
// and the staging options. One Stage is confined to a single thread.
class Stage {
public:
  explicit Stage(StageOptions opts = {});

  Graph& g() { return *graph_; }
  const StageOptions& options() const { return opts_; }
  RewriteRegistry& rewrites() { return rewrites_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  void warn(std::string msg) { warnings_.push_back(std::move(msg)); }

  void begin() { graph_->begin_program(); }
  void finish(DVal result) { graph_->end_program(result.e); }
  void finish() { graph_->end_program(Expr::unit()); }
  std::shared_ptr<Graph> take_graph() {
    graph_->freeze();
    return graph_;
  }

  // --- literal lifting ---------------------------------------------------
  DInt lit(int64_t x) { return {this, Expr::of_int(x)}; }
  DInt lit(int x) { return {this, Expr::of_int(x)}; }
  DDouble lit(double x) { return {this, Expr::of_double(x)}; }
  DBool lit(bool x) { return {this, Expr::of_bool(x)}; }
  DStr lit(const char* s) { return {this, Expr::of_str(s)}; }
  DStr lit(const std::string& s) { return {this, Expr::of_str(s)}; }

  // --- scalar smart constructors ------------------------------------------
  Expr numeric(Op op, Expr a, Expr b);
  DBool lt(DVal a, DVal b) { return {this, scalar(Op::Lt, a.e, b.e)}; }
  DBool eq(DVal a, DVal b) { return {this, scalar(Op::Eq, a.e, b.e)}; }
  DBool logic_and(DBool a, DBool b) {
    return {this, scalar(Op::And, a.e, b.e)};
  }
  DBool logic_or(DBool a, DBool b) { return {this, scalar(Op::Or, a.e, b.e)}; }
  DBool logic_not(DBool a) {
    return {this, g().atom(Node(Op::Not, {a.e}), SemType::boolean())};
  }
  DDouble to_double(DInt x) {
    return {this, g().atom(Node(Op::ToDouble, {x.e}), SemType::f64())};
  }
  DVal abs(DVal x) {
    return {this, g().atom(Node(Op::MathAbs, {x.e}), x.ty())};
  }
  DDouble sqrt(DDouble x) {
    return {this, g().atom(Node(Op::MathSqrt, {x.e}), SemType::f64())};
  }

  DUnit print(DVal x) {
    return {this, g().reflect_ordered(Node(Op::Print, {x.e}),
                                      SemType::unit())};
  }

  // --- staged control flow -------------------------------------------------
  Expr staged_if(Expr cond, const std::function<Expr()>& then_body,
                 const std::function<Expr()>& else_body);

  template <typename H>
  H if_then_else(DBool c, const std::function<H()>& t,
                 const std::function<H()>& e) {
    return H(DVal{this, staged_if(
                            c.e, [&] { return t().e; }, [&] { return e().e; })});
  }
  void if_then(DBool c, const std::function<void()>& t) {
    staged_if(
        c.e,
        [&] {
          t();
          return Expr::unit();
        },
        [] { return Expr::unit(); });
  }

  void while_loop(const std::function<DBool()>& cond,
                  const std::function<void()>& body);

  VarHandle var_alloc(DVal init);

  // --- generator-stage combinators -----------------------------------------
  void foreach (DVec v, const std::function<void(DVal)>& f);
  void amb(DVec v, const std::function<void(DVal)>& k);
  void bam(const std::vector<DVal>& xs, const std::function<void(DVal)>& k);
  void require(DBool c, const std::function<void()>& k);

  template <typename H>
  H split_branch(DBool c, const std::function<H(bool)>& k) {
    return H(DVal{this, staged_if(
                            c.e, [&] { return k(true).e; },
                            [&] { return k(false).e; })});
  }
  void split_branch_unit(DBool c, const std::function<void(bool)>& k) {
    staged_if(
        c.e,
        [&] {
          k(true);
          return Expr::unit();
        },
        [&] {
          k(false);
          return Expr::unit();
        });
  }

private:
  Expr scalar(Op op, Expr a, Expr b);

  std::shared_ptr<Graph> graph_;
  StageOptions opts_;
  RewriteRegistry rewrites_;
  std::vector<std::string> warnings_;
  long bam_expansions_{0};
  bool bam_warned_{false};
};

// Handle operators. Mixed literal forms lift the host value.
DInt operator+(DInt a, DInt b);
DInt operator-(DInt a, DInt b);
DInt operator*(DInt a, DInt b);
DInt operator/(DInt a, DInt b);
DInt operator+(DInt a, int64_t b);
DDouble operator+(DDouble a, DDouble b);
DDouble operator-(DDouble a, DDouble b);
DDouble operator*(DDouble a, DDouble b);
DDouble operator/(DDouble a, DDouble b);
DBool operator<(DInt a, DInt b);
DBool operator<(DDouble a, DDouble b);
DBool operator==(DInt a, DInt b);
DBool operator==(DDouble a, DDouble b);

}  // namespace stagekit
