"""Validation Utilities.

Input validation for schemas, generator settings and run documents. Each
validator returns `(is_valid, errors)` so callers can report every problem
at once.
"""

import math
from typing import Any, Dict, List, Tuple

ALLOWED_NOTIONS = ("SP", "EO", "PE", "EOdds", "OAE")
ALLOWED_COVERAGE = ("skip", "error")


def validate_schema(schema: Any) -> Tuple[bool, List[str]]:
    """Validate a SchemaConfig.
    
    Args:
        schema: SchemaConfig instance
        
    Returns:
        Tuple of (is_valid, list of errors)
    """
    errors = []
    
    feature_names = [f.name for f in schema.features]
    sensitive_names = [s.name for s in schema.sensitive]
    label_names = [schema.label.name]
    
    if not schema.sensitive:
        errors.append("At least one sensitive column is required")
    if not schema.features and not schema.include_sensitive:
        errors.append("At least one feature column is required")
    
    for group_name, names in (("feature", feature_names), ("sensitive", sensitive_names)):
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            errors.append(f"Duplicate {group_name} columns: {', '.join(duplicates)}")
    
    overlaps = [
        ("feature", "sensitive", set(feature_names) & set(sensitive_names)),
        ("feature", "label", set(feature_names) & set(label_names)),
        ("sensitive", "label", set(sensitive_names) & set(label_names)),
    ]
    for first, second, common in overlaps:
        if common:
            errors.append(f"Columns declared as both {first} and {second}: {', '.join(sorted(common))}")
    
    for column in list(schema.sensitive) + [schema.label]:
        if len(column.categories) < 2:
            errors.append(f"Column '{column.name}' must declare at least 2 categories")
        if len(set(column.categories)) != len(column.categories):
            errors.append(f"Column '{column.name}' declares duplicate categories")
    for feature in schema.features:
        if feature.categories is not None and len(feature.categories) < 2:
            errors.append(f"Column '{feature.name}' must declare at least 2 categories")
    
    declared = set(feature_names) | set(sensitive_names) | set(label_names)
    for rule in schema.binarize:
        if rule.column not in declared:
            errors.append(f"Binarize rule references undeclared column '{rule.column}'")
        if len(rule.buckets) != 2:
            errors.append(f"Binarize rule for '{rule.column}' must produce exactly 2 buckets")
        wildcards = sum(1 for _, values in rule.buckets if values == "*")
        if wildcards > 1:
            errors.append(f"Binarize rule for '{rule.column}' may use '*' for one bucket only")
        for column in list(schema.sensitive) + [schema.label]:
            if column.name == rule.column and set(column.categories) != set(rule.bucket_names):
                errors.append(f"Categories of '{column.name}' must equal its binarize buckets")
    
    return len(errors) == 0, errors


def validate_synth_config(cfg: Any) -> Tuple[bool, List[str]]:
    """Validate a SynthConfig."""
    errors = []
    
    if not cfg.groups:
        return False, ["At least one group is required"]
    if cfg.n_rows < 1:
        errors.append("n_rows must be >= 1")
    if cfg.n_features < 1:
        errors.append("n_features must be >= 1")
    if cfg.noise_scale < 0:
        errors.append("noise_scale must be non-negative")
    
    total = sum(g.weight for g in cfg.groups)
    if abs(total - 1.0) > 1e-9:
        errors.append(f"Group weights must sum to 1, got {total:.12g}")
    if any(g.weight < 0 for g in cfg.groups):
        errors.append("Group weights must be non-negative")
    
    widths = {len(g.codes) for g in cfg.groups}
    if len(widths) != 1:
        errors.append("All groups must declare the same number of attribute codes")
    codes = [tuple(g.codes) for g in cfg.groups]
    if len(set(codes)) != len(codes):
        errors.append("Group codes must be unique")
    if any(c < 0 for code in codes for c in code):
        errors.append("Group codes must be non-negative")
    
    n_classes = set()
    for i, group in enumerate(cfg.groups):
        if group.class_probs is None and group.prevalence is None:
            errors.append(f"Group {i} needs a prevalence or class_probs")
            continue
        if group.class_probs is None:
            p = float(group.prevalence)
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                errors.append(f"Group {i} prevalence {p} outside [0, 1]")
            n_classes.add(2)
        else:
            probs = [float(p) for p in group.class_probs]
            if any(p < 0 or p > 1 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
                errors.append(f"Group {i} class_probs must lie on the simplex")
            n_classes.add(len(probs))
        if not (0.0 <= group.label_noise <= 1.0):
            errors.append(f"Group {i} label_noise outside [0, 1]")
    if len(n_classes) > 1:
        errors.append("All groups must declare the same number of classes")
    
    if cfg.attribute_names is not None and widths and len(cfg.attribute_names) != next(iter(widths)):
        errors.append("attribute_names must match the number of attribute codes")
    if cfg.attribute_categories is not None:
        for j, categories in enumerate(cfg.attribute_categories):
            if any(code[j] >= len(categories) for code in codes if j < len(code)):
                errors.append(f"Codes of attribute {j} exceed its categories")
    if cfg.class_names is not None and n_classes and len(cfg.class_names) != max(n_classes):
        errors.append("class_names must match the number of classes")
    
    return len(errors) == 0, errors


def validate_train_config(data: Dict[str, Any]) -> Tuple[bool, List[str]]:
    """Validate the `train` section of a run document.
    
    Args:
        data: Train section dictionary
        
    Returns:
        Tuple of (is_valid, list of errors)
    """
    errors = []
    
    notion = data.get("notion", "SP")
    if notion not in ALLOWED_NOTIONS:
        errors.append(f"Notion must be one of: {', '.join(ALLOWED_NOTIONS)}")
    
    eta = data.get("eta", 0.0)
    if not _is_number(eta) or eta < 0:
        errors.append("eta must be a non-negative number")
    
    epochs = data.get("epochs")
    if not isinstance(epochs, int) or epochs < 1:
        errors.append("epochs must be a positive integer")
    
    momentum = data.get("momentum", 0.0)
    if not _is_number(momentum) or not (0.0 <= momentum < 1.0):
        errors.append("momentum must satisfy 0 <= momentum < 1")
    
    decay = data.get("weight_decay", 0.0)
    if not _is_number(decay) or decay < 0:
        errors.append("weight_decay must be non-negative")
    
    batch_size = data.get("batch_size")
    if batch_size is not None and (not isinstance(batch_size, int) or batch_size < 1):
        errors.append("batch_size must be a positive integer or null for full batch")
    
    policy = data.get("coverage_policy", "skip")
    if policy not in ALLOWED_COVERAGE:
        errors.append(f"coverage_policy must be one of: {', '.join(ALLOWED_COVERAGE)}")
    
    lambdas = data.get("lambdas")
    if lambdas is not None:
        if not isinstance(lambdas, (list, tuple)) or not all(_is_number(v) and v > 0 for v in lambdas):
            errors.append("lambdas must be a list of positive numbers")
    
    schedule = data.get("lr_schedule")
    if schedule is not None:
        if not isinstance(schedule, (list, tuple)) or not schedule:
            errors.append("lr_schedule must be a non-empty list of [epoch, rate] pairs")
        else:
            for entry in schedule:
                if (not isinstance(entry, (list, tuple)) or len(entry) != 2
                        or not isinstance(entry[0], int) or not _is_number(entry[1]) or entry[1] <= 0):
                    errors.append(f"Invalid lr_schedule entry: {entry}")
    
    hidden = data.get("hidden_sizes", [])
    if not isinstance(hidden, (list, tuple)) or not all(isinstance(h, int) and h >= 1 for h in hidden):
        errors.append("hidden_sizes must be a list of positive integers")
    
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or seed < 0:
        errors.append("seed must be a non-negative integer")
    
    return len(errors) == 0, errors


def validate_sweep_config(data: Dict[str, Any]) -> Tuple[bool, List[str]]:
    """Validate the `sweep` section of a run document."""
    errors = []
    
    etas = data.get("etas")
    if etas is not None:
        if not isinstance(etas, (list, tuple)) or not etas:
            errors.append("etas must be a non-empty list")
        elif not all(_is_number(e) and e >= 0 for e in etas):
            errors.append("etas must be non-negative numbers")
    
    seeds = data.get("seeds")
    if not isinstance(seeds, (list, tuple)) or len(seeds) < 1:
        errors.append("seeds must be a non-empty list")
    elif not all(isinstance(s, int) and s >= 0 for s in seeds):
        errors.append("seeds must be non-negative integers")
    
    threshold = data.get("threshold", 0.2)
    if not _is_number(threshold) or not (0.0 < threshold <= 1.0):
        errors.append("threshold must satisfy 0 < s <= 1")
    
    return len(errors) == 0, errors


def _is_number(value: Any) -> bool:
    """Check for a finite real number (bools excluded)."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False
    return math.isfinite(value)
