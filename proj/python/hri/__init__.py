from ._hri import (
    LogicError,
    Model,
    Task,
    TaskError,
    TrainingError,
    build_model,
    check_gradients,
    default_config,
    forward_chain,
    generate_task,
    infer,
    load_task,
    reference_solution,
    run_experiment,
    save_task,
    symbolic_evaluate,
    task_names,
    train,
)

__all__ = [
    "LogicError",
    "Model",
    "Task",
    "TaskError",
    "TrainingError",
    "build_model",
    "check_gradients",
    "default_config",
    "forward_chain",
    "generate_task",
    "infer",
    "load_task",
    "reference_solution",
    "run_experiment",
    "save_task",
    "symbolic_evaluate",
    "task_names",
    "train",
]
