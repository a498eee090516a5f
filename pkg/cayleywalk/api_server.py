import io
import json
import logging
from datetime import datetime
from typing import List

from flask import Flask, jsonify, request
from flask_cors import CORS

from . import __version__
from .config import load_config, setup_logging
from .controller import GroupController
from .errors import CayleyWalkError

logger = logging.getLogger(__name__)

app = Flask(__name__)
CORS(app)

controller = GroupController()

GROUP_FLAGS = ("--group", "--file")
BLOCKED_COMMANDS = {"serve"}


def _with_loaded_group(argv: List[str]) -> List[str]:
    """Append the loaded group to argv unless the caller named one."""
    if any(flag in argv for flag in GROUP_FLAGS) or not controller.group_loaded:
        return argv
    if controller.presentation_file is not None:
        return argv + ["--file", controller.presentation_file]
    return argv + ["--group", controller.group_name]


@app.route('/health', methods=['GET'])
def health_check():
    return jsonify({
        "status": "healthy",
        "version": __version__,
        "timestamp": datetime.now().isoformat(),
        "group_info": controller.get_group_info()
    })


@app.route('/groups', methods=['GET'])
def list_groups():
    groups = controller.get_available_groups()
    groups.update({"current_group": controller.group_name, "group_loaded": controller.group_loaded})
    return jsonify(groups)


@app.route('/groups/load', methods=['POST'])
def load_group():
    data = request.get_json(silent=True) or {}
    name = data.get('group')
    path = data.get('presentation_file')
    if not name and not path:
        return jsonify({"error": "group or presentation_file is required"}), 400

    logger.info(f"Loading group: {name or path}")
    try:
        controller.load_group(name or None, path or None)
    except CayleyWalkError as e:
        return jsonify({"error": e.to_dict()}), 400
    return jsonify({
        "success": True,
        "message": f"Group {controller.group_name} loaded successfully",
        "group_info": controller.get_group_info()
    })


@app.route('/groups/unload', methods=['POST'])
def unload_group():
    controller.unload_group()
    return jsonify({"success": True, "message": "Group unloaded successfully"})


@app.route('/config', methods=['GET'])
def get_config():
    return jsonify({"config": controller.config.to_dict()})


@app.route('/run', methods=['POST'])
def run_command():
    # imported here: cli imports this module lazily for `serve`
    from .cli import dispatch

    data = request.get_json(silent=True) or {}
    argv = data.get('argv')
    if not isinstance(argv, list) or not argv or not all(isinstance(a, str) for a in argv):
        return jsonify({"error": "argv must be a non-empty list of strings"}), 400
    if argv[0] in BLOCKED_COMMANDS:
        return jsonify({"error": f"'{argv[0]}' cannot be run through the API"}), 400

    argv = _with_loaded_group(argv)
    out = io.StringIO()
    exit_code = dispatch(argv, stdout=out, config=controller.config, controller=controller)
    text = out.getvalue()
    try:
        body = json.loads(text) if text else None
    except json.JSONDecodeError:
        body = text
    logger.info(f"Ran {' '.join(argv)} -> exit {exit_code}")
    return jsonify({"exit_code": exit_code, "body": body})


@app.errorhandler(404)
def not_found(error):
    return jsonify({"error": "Endpoint not found"}), 404


@app.errorhandler(500)
def internal_error(error):
    return jsonify({"error": "Internal server error"}), 500


def run_server(host='127.0.0.1', port=8000, debug=False):
    logger.info(f"Starting cayleywalk API server on {host}:{port}")
    app.run(host=host, port=port, debug=debug, threaded=True)


if __name__ == '__main__':
    import argparse

    parser = argparse.ArgumentParser(description='cayleywalk API Server')
    parser.add_argument('--host', default='127.0.0.1', help='Host to bind to')
    parser.add_argument('--port', type=int, default=8000, help='Port to bind to')
    parser.add_argument('--debug', action='store_true', help='Enable debug mode')
    parser.add_argument('--config', help='Engine config file (JSON or YAML)')

    args = parser.parse_args()
    config = load_config(args.config)
    setup_logging(config.log_level, config.log_file, tag="API-SERVER")
    controller.set_config(config)

    try:
        run_server(args.host, args.port, args.debug)
    except KeyboardInterrupt:
        logger.info("Server stopped by user")
    except Exception as e:
        logger.error(f"Server error: {e}")
