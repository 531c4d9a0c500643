"""FastAPI service wrapping the experiment harness.

Domain errors map to HTTP 400 with an `error_kind` of "config" or "data"
(the CLI turns these into exit codes 2 and 3); request-shape problems are
FastAPI's usual 422.
"""

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from .. import harness as hz
from .. import synth
from ..errors import ConfigError, DataError, WicError
from . import models as m

app = FastAPI(title="crosswic", version=__version__)


def _error_kind(exc: WicError) -> str:
    if isinstance(exc, ConfigError):
        return "config"
    if isinstance(exc, DataError):
        return "data"
    return "internal"


@app.exception_handler(WicError)
async def wic_error_handler(request: Request, exc: WicError):
    kind = _error_kind(exc)
    status = 400 if kind in ("config", "data") else 500
    return JSONResponse(
        status_code=status,
        content={"error_kind": kind, "detail": str(exc)},
    )


@app.get("/health", response_model=m.HealthResponse)
def health() -> m.HealthResponse:
    return m.HealthResponse(status="ok", version=__version__)


def _response_from_result(result: hz.RunResult) -> m.ExperimentResponse:
    report_text = ""
    if result.report_path:
        try:
            with open(result.report_path, encoding="utf-8") as fh:
                report_text = fh.read()
        except OSError:
            report_text = ""
    return m.ExperimentResponse(
        system=result.system,
        rows=[m.ResultRowModel(system=r.system, lang_pair=r.lang_pair, n=r.n,
                               correct=r.correct, accuracy=r.accuracy)
              for r in result.rows],
        metrics=[m.EpochMetric(**entry) for entry in result.metrics],
        skipped=result.skipped,
        results_path=result.results_path,
        predictions_path=result.predictions_path,
        report_path=result.report_path,
        report_text=report_text,
    )


@app.post("/experiments/finetune", response_model=m.ExperimentResponse)
def experiments_finetune(request: m.ExperimentRequest) -> m.ExperimentResponse:
    if request.strategy != "finetune":
        raise ConfigError("this endpoint runs the finetune strategy only")
    result = hz.run_experiment(request.to_experiment_config())
    return _response_from_result(result)


@app.post("/experiments/feature", response_model=m.ExperimentResponse)
def experiments_feature(request: m.ExperimentRequest) -> m.ExperimentResponse:
    if request.strategy == "finetune":
        raise ConfigError("use /experiments/finetune for the finetune strategy")
    result = hz.run_experiment(request.to_experiment_config())
    return _response_from_result(result)


@app.post("/features/extract", response_model=m.ExtractResponse)
def features_extract(request: m.ExtractRequest) -> m.ExtractResponse:
    cfg = request.to_experiment_config()
    written = hz.extract_features(cfg, splits=tuple(request.splits),
                                  out_dir=request.out_dir)
    return m.ExtractResponse(written=written)


@app.post("/evaluate", response_model=m.EvaluateResponse)
def evaluate(request: m.EvaluateRequest) -> m.EvaluateResponse:
    predictions = hz.read_predictions_csv(request.predictions_path)
    rows = hz.rederive_results(predictions)
    if request.out_path:
        hz.write_results_csv(request.out_path, rows)
    return m.EvaluateResponse(
        rows=[m.ResultRowModel(system=r.system, lang_pair=r.lang_pair, n=r.n,
                               correct=r.correct, accuracy=r.accuracy)
              for r in rows],
        out_path=request.out_path,
    )


@app.post("/report", response_model=m.ReportResponse)
def report(request: m.ReportRequest) -> m.ReportResponse:
    grid = hz.ResultGrid()
    for path in request.results_paths:
        for row in hz.read_results_csv(path):
            grid.add_row(row)
    grid = grid.filtered(include_joint=request.include_joint)
    text, csv_text = hz.emit_report(grid, pairs=request.pairs)
    if request.out_text:
        with open(request.out_text, "w", encoding="utf-8") as fh:
            fh.write(text)
    if request.out_csv:
        with open(request.out_csv, "w", encoding="utf-8") as fh:
            fh.write(csv_text)
    return m.ReportResponse(text=text, csv_text=csv_text)


@app.post("/conllu/validate", response_model=m.ConlluValidateResponse)
def conllu_validate(request: m.ConlluValidateRequest) -> m.ConlluValidateResponse:
    result = hz.validate_conllu_against_pairs(
        request.pairs_path, request.conllu_path,
        require_languages=tuple(request.require_languages),
    )
    return m.ConlluValidateResponse(**result)


@app.post("/synth", response_model=m.SynthResponse)
def make_synth(request: m.SynthRequest) -> m.SynthResponse:
    paths = synth.write_marker_corpus(
        request.out_dir, n_train=request.n_train, n_test=request.n_test,
        seed=request.seed, with_conllu=request.with_conllu,
    )
    return m.SynthResponse(paths=paths)
